#pragma once

#include "fwdreg/bounds.hpp"
#include "fwdreg/error.hpp"
#include "fwdreg/experiment.hpp"
#include "fwdreg/forward_select.hpp"
#include "fwdreg/io.hpp"
#include "fwdreg/linalg.hpp"
#include "fwdreg/oracle.hpp"
#include "fwdreg/simulate.hpp"
#include "fwdreg/sparse_eig.hpp"
#include "fwdreg/types.hpp"
