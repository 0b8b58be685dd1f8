#pragma once

#include "vict/model.hpp"

namespace vict::testing {

// Cheap configuration for pipeline tests: 16-pixel cells, 16 tokens.
inline ModelConfig small_model() {
  ModelConfig m;
  m.cell_size = 16;
  m.patch_size = 8;
  m.embed_dim = 16;
  m.encoder_depth = 1;
  m.decoder_depth = 1;
  m.num_heads = 2;
  m.mlp_ratio = 2;
  return m;
}

}  // namespace vict::testing
