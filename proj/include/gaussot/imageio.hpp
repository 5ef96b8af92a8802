#pragma once

#include "gaussot/stats.hpp"
#include "gaussot/transforms.hpp"

#include <cstddef>
#include <filesystem>
#include <vector>

namespace gaussot {

enum class ColorSpace { RGB, Lab };

/**
 * @brief H×W×3 image stored row-major with interleaved channels.
 *
 * RGB values are gamma-encoded sRGB in [0, 1]. Lab values use L in [0, 100].
 */
struct Image {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> pixels;
    ColorSpace colorspace = ColorSpace::RGB;

    Image() = default;
    Image(std::size_t w, std::size_t h, ColorSpace cs = ColorSpace::RGB)
        : width(w), height(h), pixels(w * h * 3, 0.0), colorspace(cs) {}

    double& at(std::size_t y, std::size_t x, std::size_t ch) { return pixels[(y * width + x) * 3 + ch]; }
    double at(std::size_t y, std::size_t x, std::size_t ch) const {
        return pixels[(y * width + x) * 3 + ch];
    }
};

/**
 * @brief Loads an 8- or 16-bit PNG as RGB in [0, 1].
 *
 * Palette images are expanded, grayscale is replicated across channels and
 * alpha is dropped. Throws IoError if the file cannot be opened and
 * FormatError if it is not a PNG.
 */
Image load_png(const std::filesystem::path& path);

/// Converts to RGB if needed, clamps to [0, 1] and writes 8-bit RGB, rounding half to even.
void save_png(const Image& img, const std::filesystem::path& path);

/// 3×(H·W) feature map; column index = y·W + x.
FeatureMap image_as_features(const Image& img);

Image features_as_image(const FeatureMap& f, std::size_t width, std::size_t height,
                        ColorSpace colorspace);

// sRGB (D65) <-> CIE Lab. Values outside the gamut are converted without clamping.
Image to_lab(const Image& rgb);
Image to_rgb(const Image& img);

/// Clamps every channel to [0, 1]; the image must be RGB.
Image clamped(Image rgb);

/**
 * @brief Color transfer without the final clamp: transforms `content` pixels
 * towards the color statistics of `style` in `colorspace` and returns the
 * result as RGB, possibly outside [0, 1].
 */
Image color_transfer_unclamped(const Image& content, const Image& style, const TransformKind& k,
                               double alpha = 1.0, ColorSpace colorspace = ColorSpace::RGB,
                               double ridge = kDefaultRidge);

Image color_transfer(const Image& content, const Image& style, const TransformKind& k,
                     double alpha = 1.0, ColorSpace colorspace = ColorSpace::RGB,
                     double ridge = kDefaultRidge);

}  // namespace gaussot
