#pragma once

#include "aflow/ir.hpp"

namespace testutil {

// Two-image latent blend: load both images, encode them, interpolate the
// latents, re-sample onto the result under a text prompt, decode and save.
// Validates cleanly against the bundled catalog.
inline aflow::Workflow blend_pipeline() {
  aflow::Workflow w;
  w.add_node("ckpt", "CheckpointLoader", {});
  w.add_node("pos", "CLIPTextEncode", {{"text", aflow::ParamValue("lush jungle ruins")}});
  w.add_node("im1", "LoadImage", {{"path", aflow::ParamValue("jungle.png")}});
  w.add_node("im2", "LoadImage", {{"path", aflow::ParamValue("ruins.png")}});
  w.add_node("enc1", "VAEEncode", {});
  w.add_node("enc2", "VAEEncode", {});
  w.add_node("mix", "LatentBlend", {{"blend_factor", aflow::ParamValue(0.6)}});
  w.add_node("samp", "KSampler",
             {{"seed", aflow::ParamValue(std::int64_t{7})},
              {"steps", aflow::ParamValue(std::int64_t{20})},
              {"denoise", aflow::ParamValue(0.55)}});
  w.add_node("dec", "VAEDecode", {});
  w.add_node("save", "SaveImage", {{"filename_prefix", aflow::ParamValue("blend")}});

  w.connect("ckpt", "CLIP", "pos", "clip");
  w.connect("im1", "IMAGE", "enc1", "pixels");
  w.connect("ckpt", "VAE", "enc1", "vae");
  w.connect("im2", "IMAGE", "enc2", "pixels");
  w.connect("ckpt", "VAE", "enc2", "vae");
  w.connect("enc1", "LATENT", "mix", "samples1");
  w.connect("enc2", "LATENT", "mix", "samples2");
  w.connect("ckpt", "MODEL", "samp", "model");
  w.connect("pos", "CONDITIONING", "samp", "positive");
  w.connect("mix", "LATENT", "samp", "latent_image");
  w.connect("samp", "LATENT", "dec", "samples");
  w.connect("ckpt", "VAE", "dec", "vae");
  w.connect("dec", "IMAGE", "save", "images");
  return w;
}

// The blend pipeline grown by a negative prompt, an upscale stage and a
// preview tap: 13 nodes, 17 edges.
inline aflow::Workflow image_merge() {
  aflow::Workflow w = blend_pipeline();
  w.add_node("neg", "CLIPTextEncode", {{"text", aflow::ParamValue("blurry, low detail")}});
  w.add_node("up", "UpscaleImage", {{"scale", aflow::ParamValue(2.0)}});
  w.add_node("prev", "PreviewImage", {});
  w.connect("ckpt", "CLIP", "neg", "clip");
  w.connect("neg", "CONDITIONING", "samp", "negative");
  w.disconnect("save", "images");
  w.connect("dec", "IMAGE", "up", "image");
  w.connect("up", "IMAGE", "save", "images");
  w.connect("dec", "IMAGE", "prev", "images");
  return w;
}

}  // namespace testutil
