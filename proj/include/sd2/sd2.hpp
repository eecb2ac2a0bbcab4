#pragma once

#include "sd2/chaos_keystream.hpp"
#include "sd2/crypto_pipeline.hpp"
#include "sd2/diffusion_core.hpp"
#include "sd2/error.hpp"
#include "sd2/evaluation.hpp"
#include "sd2/extractor.hpp"
#include "sd2/image.hpp"
#include "sd2/payload_codec.hpp"
#include "sd2/png_io.hpp"
#include "sd2/rng.hpp"
#include "sd2/stego_injector.hpp"
#include "sd2/text_map.hpp"
