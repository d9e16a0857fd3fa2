#pragma once

#include "albatch/clustering.hpp"
#include "albatch/committee.hpp"
#include "albatch/config.hpp"
#include "albatch/csv.hpp"
#include "albatch/dataset.hpp"
#include "albatch/error.hpp"
#include "albatch/features.hpp"
#include "albatch/harness.hpp"
#include "albatch/linalg.hpp"
#include "albatch/random.hpp"
#include "albatch/regression.hpp"
#include "albatch/stats.hpp"
#include "albatch/strategies.hpp"
