#pragma once

#include "windnoise/allpole.hpp"
#include "windnoise/buffer.hpp"
#include "windnoise/coherence_analysis.hpp"
#include "windnoise/corcos.hpp"
#include "windnoise/engine.hpp"
#include "windnoise/error.hpp"
#include "windnoise/excitation.hpp"
#include "windnoise/gain_model.hpp"
#include "windnoise/random.hpp"
#include "windnoise/single_channel.hpp"
#include "windnoise/stft.hpp"
#include "windnoise/wav.hpp"
#include "windnoise/window.hpp"
