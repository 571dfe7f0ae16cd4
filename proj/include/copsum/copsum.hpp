#pragma once

#include "copsum/copula.hpp"
#include "copsum/copula_io.hpp"
#include "copsum/error.hpp"
#include "copsum/gk.hpp"
#include "copsum/numeric.hpp"
#include "copsum/oracle.hpp"
#include "copsum/streamgen.hpp"
#include "copsum/vine.hpp"
