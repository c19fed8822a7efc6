#pragma once

#include "ffast2d/types.hpp"
#include "ffast2d/crt.hpp"
#include "ffast2d/fft.hpp"
#include "ffast2d/shifts.hpp"
#include "ffast2d/plan.hpp"
#include "ffast2d/source.hpp"
#include "ffast2d/frontend.hpp"
#include "ffast2d/peeler.hpp"
#include "ffast2d/robust.hpp"
#include "ffast2d/coprime.hpp"
#include "ffast2d/oracle.hpp"
#include "ffast2d/io.hpp"
