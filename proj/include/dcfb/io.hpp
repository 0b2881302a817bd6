#pragma once

#include <string>

#include "dcfb/models.hpp"
#include "dcfb/training.hpp"

namespace dcfb {

// Model bundle file, magic "DCFB" version 1. Little-endian throughout.
// Layout after the 5-byte magic+version prefix, sub-models in the order
// sparsifier, collaborator, denoiser, desparsifier:
//   u32 layer_count, then per layer:
//     u32 in_dim, u32 out_dim, u32 activation (0 identity, 1 relu),
//     f64 weights row-major (out_dim x in_dim), f64 biases (out_dim)
// The collaborator is stored as one bias-free layer (in=collab_count,
// out=code_dim, activation 0). A trailing metadata block closes the file:
//   u32 patch_side, u32 code_dim, u32 collab_count, u32 window_side,
//   f64 sigma255, u64 seed
// Anything after that is an error, as is any truncation.
void save_model(const ModelBundle& bundle, const std::string& path);
ModelBundle load_model(const std::string& path);

// Patch-pair dataset file, magic "DCFD" version 1. Little-endian.
//   u32 patch_side, u32 image_count, f64 sigma255, u64 seed
//   per image: u32 width, u32 height, u32 patch_count
//   per image: all clean patches, then all noisy patches, each patch
//   patch_side^2 f64 values in scan order, patches in stride-1 scan order
void save_dataset(const PatchPairSet& dataset, const std::string& path);
PatchPairSet load_dataset(const std::string& path);

} // namespace dcfb
