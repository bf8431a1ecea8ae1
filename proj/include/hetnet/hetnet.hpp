#ifndef HETNET_HETNET_HPP
#define HETNET_HETNET_HPP

#include "calibration.hpp"
#include "config.hpp"
#include "ctmc.hpp"
#include "deployment.hpp"
#include "des.hpp"
#include "energy.hpp"
#include "error.hpp"
#include "io.hpp"
#include "policy.hpp"
#include "radio.hpp"

#endif
