#pragma once

#include "htbif/coeff.hpp"
#include "htbif/errors.hpp"
#include "htbif/expansion.hpp"
#include "htbif/io.hpp"
#include "htbif/linalg.hpp"
#include "htbif/linstab.hpp"
#include "htbif/model.hpp"
#include "htbif/nodal.hpp"
#include "htbif/parallel.hpp"
#include "htbif/perturbed.hpp"
#include "htbif/profile.hpp"
#include "htbif/spectral.hpp"
#include "htbif/timemap.hpp"
