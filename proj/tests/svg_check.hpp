#pragma once

// Parses emitted SVG with an independent XML reader so tests check the
// document, not the renderer's own bookkeeping.

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace svgcheck {

using Attrs = std::map<std::string, std::string>;

struct Document {
  std::vector<Attrs> paths, circles, polylines;
};

inline void collect(const boost::property_tree::ptree& node, Document& doc) {
  for (const auto& [tag, child] : node) {
    if (tag == "<xmlattr>") continue;
    Attrs attrs;
    if (auto a = child.get_child_optional("<xmlattr>"))
      for (const auto& [k, v] : *a) attrs[k] = v.data();
    if (tag == "path") doc.paths.push_back(attrs);
    if (tag == "circle") doc.circles.push_back(attrs);
    if (tag == "polyline") doc.polylines.push_back(attrs);
    collect(child, doc);
  }
}

/// Throws boost::property_tree::xml_parser_error on malformed input.
inline Document parse(const std::string& svg) {
  std::istringstream in(svg);
  boost::property_tree::ptree tree;
  boost::property_tree::read_xml(in, tree);
  Document doc;
  collect(tree, doc);
  return doc;
}

inline std::uint64_t checksum(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

struct Rgb {
  int r, g, b;
};

inline Rgb parse_hex(const std::string& s) {
  return {std::stoi(s.substr(1, 2), nullptr, 16), std::stoi(s.substr(3, 2), nullptr, 16),
          std::stoi(s.substr(5, 2), nullptr, 16)};
}

}  // namespace svgcheck
