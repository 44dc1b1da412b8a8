#pragma once

#include "rpnjoin/bench.hpp"
#include "rpnjoin/csv.hpp"
#include "rpnjoin/error.hpp"
#include "rpnjoin/eval.hpp"
#include "rpnjoin/join.hpp"
#include "rpnjoin/plan.hpp"
#include "rpnjoin/quicksort.hpp"
#include "rpnjoin/relation.hpp"
