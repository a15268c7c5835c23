#pragma once

#include "cantordiff/cli.hpp"
#include "cantordiff/decision.hpp"
#include "cantordiff/determ.hpp"
#include "cantordiff/error.hpp"
#include "cantordiff/json.hpp"
#include "cantordiff/pairing.hpp"
#include "cantordiff/parallel.hpp"
#include "cantordiff/rng.hpp"
#include "cantordiff/simulate.hpp"
#include "cantordiff/spec.hpp"
#include "cantordiff/spectrum.hpp"
