#pragma once

#include "corpus.hpp"
#include "errors.hpp"
#include "evaluation.hpp"
#include "features.hpp"
#include "forecast.hpp"
#include "model.hpp"
#include "synthetic.hpp"
#include "textprep.hpp"
#include "timestamp.hpp"
#include "unicode.hpp"
