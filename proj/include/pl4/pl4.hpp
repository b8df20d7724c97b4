#pragma once

#include "pl4/config.hpp"
#include "pl4/error.hpp"
#include "pl4/forms.hpp"
#include "pl4/geodesic.hpp"
#include "pl4/holonomy.hpp"
#include "pl4/plcomplex.hpp"
#include "pl4/report.hpp"
#include "pl4/simplicial.hpp"
#include "pl4/split.hpp"
#include "pl4/surface2.hpp"
#include "pl4/tensor4.hpp"
