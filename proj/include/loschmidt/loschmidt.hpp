#pragma once

#include "loschmidt/bath.hpp"
#include "loschmidt/echo.hpp"
#include "loschmidt/engine.hpp"
#include "loschmidt/error.hpp"
#include "loschmidt/fit.hpp"
#include "loschmidt/oracle.hpp"
#include "loschmidt/spectral.hpp"
#include "loschmidt/spin_algebra.hpp"
#include "loschmidt/units.hpp"
