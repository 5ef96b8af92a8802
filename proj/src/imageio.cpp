#include "gaussot/imageio.hpp"

#include "gaussot/error.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>

namespace gaussot {

namespace {

// sRGB primaries, D65 white point.
constexpr double kRgbToXyz[3][3] = {
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
};
constexpr double kWhite[3] = {0.95047, 1.0, 1.08883};
constexpr double kDelta = 6.0 / 29.0;

// Both transfer functions are extended odd-symmetrically so that
// out-of-gamut intermediates survive the round trip until the final clamp.
double srgb_to_linear(double c) {
    const double a = std::abs(c);
    const double v = a <= 0.04045 ? a / 12.92 : std::pow((a + 0.055) / 1.055, 2.4);
    return std::copysign(v, c);
}

double linear_to_srgb(double l) {
    const double a = std::abs(l);
    const double v = a <= 0.0031308 ? 12.92 * a : 1.055 * std::pow(a, 1.0 / 2.4) - 0.055;
    return std::copysign(v, l);
}

// Exact inverse of kRgbToXyz, so RGB → Lab → RGB round-trips to rounding error.
struct Inverse3 {
    double m[3][3];
    Inverse3() {
        const auto& a = kRgbToXyz;
        const double det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                           a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) {
                const int r1 = (c + 1) % 3, r2 = (c + 2) % 3;
                const int c1 = (r + 1) % 3, c2 = (r + 2) % 3;
                m[r][c] = (a[r1][c1] * a[r2][c2] - a[r1][c2] * a[r2][c1]) / det;
            }
        }
    }
};

const Inverse3& xyz_to_rgb() {
    static const Inverse3 inv;
    return inv;
}

double lab_f(double t) {
    return t > kDelta * kDelta * kDelta ? std::cbrt(t) : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

double lab_f_inv(double t) {
    return t > kDelta ? t * t * t : 3.0 * kDelta * kDelta * (t - 4.0 / 29.0);
}

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct ReadRows {
    std::vector<png_byte> bytes;
    std::size_t width = 0;
    std::size_t height = 0;
    int bit_depth = 8;
};

// libpng's default handlers print to stderr; errors are reported through
// the returned message instead.
void png_error_quiet(png_structp png, png_const_charp msg) {
    auto* sink = static_cast<std::string*>(png_get_error_ptr(png));
    if (sink != nullptr) *sink = msg;
    png_longjmp(png, 1);
}

void png_warning_quiet(png_structp, png_const_charp) {}

// Kept free of non-trivially destructible locals because of longjmp.
bool decode_png(std::FILE* fp, ReadRows& out, std::string& error) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, png_error_quiet,
                                             png_warning_quiet);
    if (png == nullptr) {
        error = "cannot allocate PNG reader";
        return false;
    }
    png_infop info = png_create_info_struct(png);
    if (info == nullptr) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        error = "cannot allocate PNG info";
        return false;
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        error = "corrupt PNG data: " + error;
        return false;
    }
    png_init_io(png, fp);
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const png_byte color_type = png_get_color_type(png, info);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) {
        png_set_expand_gray_1_2_4_to_8(png);
    }
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
        png_set_gray_to_rgb(png);
    }
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    out.width = png_get_image_width(png, info);
    out.height = png_get_image_height(png, info);
    out.bit_depth = png_get_bit_depth(png, info);
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    out.bytes.resize(rowbytes * out.height);
    for (std::size_t y = 0; y < out.height; ++y) {
        png_read_row(png, out.bytes.data() + y * rowbytes, nullptr);
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return true;
}

bool encode_png(std::FILE* fp, const std::vector<png_byte>& rgb, std::size_t width,
                std::size_t height, std::string& error) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, png_error_quiet,
                                              png_warning_quiet);
    if (png == nullptr) {
        error = "cannot allocate PNG writer";
        return false;
    }
    png_infop info = png_create_info_struct(png);
    if (info == nullptr) {
        png_destroy_write_struct(&png, nullptr);
        error = "cannot allocate PNG info";
        return false;
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        error = "PNG encoding failed: " + error;
        return false;
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (std::size_t y = 0; y < height; ++y) {
        png_write_row(png, rgb.data() + y * width * 3);
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return true;
}

}  // namespace

Image load_png(const std::filesystem::path& path) {
    const std::string where = path.string();
    FilePtr fp(std::fopen(where.c_str(), "rb"));
    if (!fp) {
        fail(ErrorCode::IoError, where + ": cannot open for reading");
    }
    png_byte signature[8];
    if (std::fread(signature, 1, 8, fp.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0) {
        fail(ErrorCode::FormatError, where + ": not a PNG file");
    }
    ReadRows rows;
    std::string error;
    if (!decode_png(fp.get(), rows, error)) {
        fail(ErrorCode::FormatError, where + ": " + error);
    }

    Image img(rows.width, rows.height, ColorSpace::RGB);
    const std::size_t count = rows.width * rows.height * 3;
    if (rows.bit_depth == 16) {
        for (std::size_t i = 0; i < count; ++i) {
            const unsigned v = (static_cast<unsigned>(rows.bytes[2 * i]) << 8) | rows.bytes[2 * i + 1];
            img.pixels[i] = static_cast<double>(v) / 65535.0;
        }
    } else {
        for (std::size_t i = 0; i < count; ++i) img.pixels[i] = rows.bytes[i] / 255.0;
    }
    return img;
}

void save_png(const Image& img, const std::filesystem::path& path) {
    const Image rgb = clamped(to_rgb(img));
    std::vector<png_byte> bytes(rgb.pixels.size());
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        // nearbyint under the default rounding mode rounds half to even.
        bytes[i] = static_cast<png_byte>(std::nearbyint(rgb.pixels[i] * 255.0));
    }
    const std::string where = path.string();
    FilePtr fp(std::fopen(where.c_str(), "wb"));
    if (!fp) {
        fail(ErrorCode::IoError, where + ": cannot open for writing");
    }
    std::string error;
    if (!encode_png(fp.get(), bytes, rgb.width, rgb.height, error)) {
        fail(ErrorCode::IoError, where + ": " + error);
    }
}

FeatureMap image_as_features(const Image& img) {
    const std::size_t n = img.width * img.height;
    Matrix data(3, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t ch = 0; ch < 3; ++ch) data(ch, i) = img.pixels[i * 3 + ch];
    }
    return FeatureMap(std::move(data));
}

Image features_as_image(const FeatureMap& f, std::size_t width, std::size_t height,
                        ColorSpace colorspace) {
    if (f.channels() != 3 || f.positions() != width * height) {
        fail(ErrorCode::ShapeError, "features do not describe a " + std::to_string(width) + "x" +
                                        std::to_string(height) + " three-channel image");
    }
    Image img(width, height, colorspace);
    for (std::size_t i = 0; i < width * height; ++i) {
        for (std::size_t ch = 0; ch < 3; ++ch) img.pixels[i * 3 + ch] = f.data()(ch, i);
    }
    return img;
}

Image to_lab(const Image& rgb) {
    if (rgb.colorspace == ColorSpace::Lab) return rgb;
    Image out(rgb.width, rgb.height, ColorSpace::Lab);
    for (std::size_t i = 0; i < rgb.width * rgb.height; ++i) {
        double lin[3];
        for (std::size_t ch = 0; ch < 3; ++ch) lin[ch] = srgb_to_linear(rgb.pixels[i * 3 + ch]);
        double f[3];
        for (std::size_t r = 0; r < 3; ++r) {
            const double xyz = kRgbToXyz[r][0] * lin[0] + kRgbToXyz[r][1] * lin[1] +
                               kRgbToXyz[r][2] * lin[2];
            f[r] = lab_f(xyz / kWhite[r]);
        }
        out.pixels[i * 3 + 0] = 116.0 * f[1] - 16.0;
        out.pixels[i * 3 + 1] = 500.0 * (f[0] - f[1]);
        out.pixels[i * 3 + 2] = 200.0 * (f[1] - f[2]);
    }
    return out;
}

Image to_rgb(const Image& img) {
    if (img.colorspace == ColorSpace::RGB) return img;
    Image out(img.width, img.height, ColorSpace::RGB);
    for (std::size_t i = 0; i < img.width * img.height; ++i) {
        const double fy = (img.pixels[i * 3 + 0] + 16.0) / 116.0;
        const double fx = fy + img.pixels[i * 3 + 1] / 500.0;
        const double fz = fy - img.pixels[i * 3 + 2] / 200.0;
        const double xyz[3] = {kWhite[0] * lab_f_inv(fx), kWhite[1] * lab_f_inv(fy),
                               kWhite[2] * lab_f_inv(fz)};
        const auto& m = xyz_to_rgb().m;
        for (std::size_t r = 0; r < 3; ++r) {
            const double lin = m[r][0] * xyz[0] + m[r][1] * xyz[1] + m[r][2] * xyz[2];
            out.pixels[i * 3 + r] = linear_to_srgb(lin);
        }
    }
    return out;
}

Image clamped(Image rgb) {
    if (rgb.colorspace != ColorSpace::RGB) {
        fail(ErrorCode::InvalidInput, "clamp expects an RGB image");
    }
    for (double& v : rgb.pixels) v = std::clamp(v, 0.0, 1.0);
    return rgb;
}

Image color_transfer_unclamped(const Image& content, const Image& style, const TransformKind& k,
                               double alpha, ColorSpace colorspace, double ridge) {
    if (alpha == 0.0) return to_rgb(content);
    const auto convert = [&](const Image& img) {
        return colorspace == ColorSpace::Lab ? to_lab(img) : to_rgb(img);
    };
    const Image c = convert(content);
    const Image s = convert(style);
    const FeatureMap fc = image_as_features(c);
    const FeatureMap fs = image_as_features(s);
    const AffineTransform t = make_transform(k, estimate_stats(fc), estimate_stats(fs), ridge);
    const FeatureMap moved = apply_transform(fc, t, alpha);
    return to_rgb(features_as_image(moved, c.width, c.height, colorspace));
}

Image color_transfer(const Image& content, const Image& style, const TransformKind& k,
                     double alpha, ColorSpace colorspace, double ridge) {
    return clamped(color_transfer_unclamped(content, style, k, alpha, colorspace, ridge));
}

}  // namespace gaussot
