#pragma once

#include "sentcast/common.hpp"
#include "sentcast/corpus.hpp"
#include "sentcast/dataset.hpp"
#include "sentcast/experiment.hpp"
#include "sentcast/lexicon.hpp"
#include "sentcast/lstm.hpp"
#include "sentcast/sentiment.hpp"
