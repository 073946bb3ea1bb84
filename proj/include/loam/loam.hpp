#pragma once

#include "loam/common.hpp"
#include "loam/data.hpp"
#include "loam/fem/assemble.hpp"
#include "loam/fem/bc.hpp"
#include "loam/fem/element.hpp"
#include "loam/fem/form.hpp"
#include "loam/fem/space.hpp"
#include "loam/kernel.hpp"
#include "loam/mesh.hpp"
#include "loam/parloop.hpp"
#include "loam/passes.hpp"
#include "loam/solver.hpp"
#include "loam/topology.hpp"
