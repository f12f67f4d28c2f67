#pragma once

#include "diaspora/bundleviz.hpp"
#include "diaspora/classification.hpp"
#include "diaspora/error.hpp"
#include "diaspora/flow_builder.hpp"
#include "diaspora/ingest.hpp"
#include "diaspora/metrics.hpp"
#include "diaspora/pipeline.hpp"
#include "diaspora/synth.hpp"
