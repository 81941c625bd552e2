#pragma once

#include "moprox/types.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>

namespace moprox {

/// Row-major grayscale image with intensities nominally in [0, 1].
struct GrayImage {
    int width = 0;
    int height = 0;
    Vector pixels;

    GrayImage() = default;
    GrayImage(int w, int h, Vector px);

    double& at(int row, int col) { return pixels[static_cast<Eigen::Index>(row) * width + col]; }
    double at(int row, int col) const { return pixels[static_cast<Eigen::Index>(row) * width + col]; }
};

/// Reads P2 (ASCII) or P5 (binary, 8 or 16 bit) graymaps; pixels are divided by maxval.
GrayImage read_pgm(const std::filesystem::path& path);
GrayImage parse_pgm(std::string_view bytes);
/// Writes P5 with maxval 255; values are clamped to [0, 1] and rounded half to even.
void write_pgm(const GrayImage& image, const std::filesystem::path& path);
std::string encode_pgm(const GrayImage& image);

/// Full-depth orthonormal 2-D Haar analysis (Mallat layout, row-major coefficients).
/// Width and height must be powers of two.
Vector haar_forward(const GrayImage& image);
GrayImage haar_inverse(const Vector& coeffs, int width, int height);

/// A linear map on R^n with its adjoint.
struct LinearOperatorPair {
    std::function<Vector(const Vector&)> apply;
    std::function<Vector(const Vector&)> apply_adjoint;
    double op_norm_sq_estimate = 0.0;
};

/// Separable Gaussian blur with a normalized kernel and zero padding outside the
/// image. The adjoint is the zero-padded correlation with the same kernel.
LinearOperatorPair make_blur(int width, int height, int kernel_size, double sigma);

/// Largest eigenvalue of A^T A by power iteration from a fixed start.
double estimate_op_norm_sq(const LinearOperatorPair& op, Eigen::Index n, int iterations = 100,
                           std::uint64_t seed = 0);

/// blur(img) + i.i.d. N(0, noise_sigma^2) per pixel, deterministic in `seed`.
GrayImage make_observed(const GrayImage& image, const LinearOperatorPair& blur, double noise_sigma,
                        std::uint64_t seed);

/// Checkerboard blended with a diagonal ramp; the default desk-scale test image.
GrayImage synthetic_image(int size);

}  // namespace moprox
