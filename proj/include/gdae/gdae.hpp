#pragma once

// Umbrella header.
#include "gdae/chain.hpp"
#include "gdae/conditional_model.hpp"
#include "gdae/corruption.hpp"
#include "gdae/csv.hpp"
#include "gdae/dataset.hpp"
#include "gdae/distributions.hpp"
#include "gdae/error.hpp"
#include "gdae/eval.hpp"
#include "gdae/idx.hpp"
#include "gdae/model_io.hpp"
#include "gdae/pgm.hpp"
#include "gdae/rng.hpp"
#include "gdae/sample.hpp"
#include "gdae/training.hpp"
