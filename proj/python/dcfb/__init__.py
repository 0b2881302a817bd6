"""Patch-collaboration image denoising toolkit.

Images are 2-d float arrays (height x width) with intensities in [0, 1];
noise levels are quoted on the 0-255 scale to match the file formats.
"""

from ._core import (
    Bundle,
    Dataset,
    add_noise_sigma,
    add_noise_snr,
    denoise,
    desparsify,
    evaluate,
    load_pgm,
    measure_sparsity,
    psnr,
    save_pgm,
    sparsify,
    ssim,
    train,
)

__all__ = [
    "Bundle",
    "Dataset",
    "add_noise_sigma",
    "add_noise_snr",
    "denoise",
    "desparsify",
    "evaluate",
    "load_pgm",
    "measure_sparsity",
    "psnr",
    "save_pgm",
    "sparsify",
    "ssim",
    "train",
]
