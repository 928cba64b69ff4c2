#pragma once

// Umbrella header.

#include "nash/analysis.hpp"
#include "nash/artifacts.hpp"
#include "nash/checkpoint.hpp"
#include "nash/common.hpp"
#include "nash/config.hpp"
#include "nash/corpus.hpp"
#include "nash/hashcode.hpp"
#include "nash/manifest.hpp"
#include "nash/model.hpp"
#include "nash/nn.hpp"
#include "nash/retrieval.hpp"
#include "nash/trainer.hpp"
