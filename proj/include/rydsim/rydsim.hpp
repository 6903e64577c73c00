#pragma once

#include "rydsim/antiblockade.hpp"
#include "rydsim/config.hpp"
#include "rydsim/liouville.hpp"
#include "rydsim/params.hpp"
#include "rydsim/single_atom.hpp"
#include "rydsim/spectra.hpp"
#include "rydsim/thermal.hpp"
#include "rydsim/two_atom.hpp"
#include "rydsim/units.hpp"
