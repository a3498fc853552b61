#pragma once

#include "geophase/error.hpp"
#include "geophase/rational.hpp"
#include "geophase/linalg.hpp"
#include "geophase/spectral.hpp"
#include "geophase/cyclic.hpp"
#include "geophase/geometric_operator.hpp"
#include "geophase/dynamics.hpp"
#include "geophase/time_operator.hpp"
#include "geophase/scenario.hpp"
#include "geophase/commands.hpp"
