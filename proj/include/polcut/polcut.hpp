#pragma once

#include "polcut/alphabet.hpp"
#include "polcut/capacity.hpp"
#include "polcut/decomposition.hpp"
#include "polcut/error.hpp"
#include "polcut/flow.hpp"
#include "polcut/graph.hpp"
#include "polcut/ingest.hpp"
#include "polcut/oracle.hpp"
#include "polcut/policy.hpp"
#include "polcut/transform.hpp"
