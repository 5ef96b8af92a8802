#include "gaussot/cli.hpp"

#include "gaussot/error.hpp"
#include "gaussot/imageio.hpp"
#include "gaussot/stats.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <ostream>
#include <string>

namespace gaussot::cli {

namespace {

using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string one_line(std::string s) {
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

struct TransformFlags {
    std::string method = "ost";
    double alpha = 1.0;
    double ridge = kDefaultRidge;
    std::uint64_t seed = 0;

    void attach(CLI::App& cmd) {
        cmd.add_option("--method", method, "Feature transform")
            ->check(CLI::IsMember(method_names()))
            ->capture_default_str();
        cmd.add_option("--alpha", alpha, "Blend weight between content (0) and transformed (1)")
            ->check(CLI::Range(0.0, 1.0))
            ->capture_default_str();
        cmd.add_option("--ridge", ridge, "Relative ridge added to covariances before inversion")
            ->check(CLI::NonNegativeNumber)
            ->capture_default_str();
        cmd.add_option("--seed", seed, "Seed of the rotation used by rotated-wct")
            ->capture_default_str();
    }

    TransformKind kind() const { return *parse_method(method, seed); }
};

DType parse_dtype(const std::string& s) { return s == "f4" ? DType::F4 : DType::F8; }

Json loss_record(const FeatureMap& content, const FeatureMap& style, const FeatureMap& moved) {
    Json j;
    j["content_loss"] = content_loss(content, moved);
    j["style_loss"] = style_loss(moved, style);
    return j;
}

Json method_record(const std::string& name, const AffineTransform& t, const GaussianStats& c,
                   const GaussianStats& s, const FeatureMap& content, const FeatureMap& style,
                   double alpha, double build_ms) {
    const FeatureMap moved = apply_transform(content, t, alpha);
    const Json losses = loss_record(content, style, moved);
    Json j;
    j["method"] = name;
    j["expected_content_cost"] = expected_content_cost(t, c, s);
    j["eq2_residual"] = covariance_residual(t.matrix, c.cov, s.cov);
    j["content_loss"] = losses["content_loss"];
    j["style_loss"] = losses["style_loss"];
    j["wall_time_ms"] = build_ms;
    return j;
}

void print_json(std::ostream& out, const Json& j) { out << j.dump(2) << '\n'; }

int cmd_color_transfer(const std::string& content_path, const std::string& style_path,
                       const TransformFlags& flags, const std::string& colorspace,
                       const std::string& output) {
    const Image content = load_png(content_path);
    const Image style = load_png(style_path);
    const ColorSpace cs = colorspace == "lab" ? ColorSpace::Lab : ColorSpace::RGB;
    const Image result = color_transfer(content, style, flags.kind(), flags.alpha, cs, flags.ridge);
    save_png(result, output);
    return kExitOk;
}

int cmd_feature_transform(const std::string& content_path, const std::string& style_path,
                          const TransformFlags& flags, const std::string& dtype,
                          const std::string& output) {
    const TensorFile content = read_tensor_file(content_path);
    const FeatureMap style = read_tensor(style_path);
    if (content.features.channels() != style.channels()) {
        fail(ErrorCode::ShapeError, "content has " + std::to_string(content.features.channels()) +
                                        " channels but style has " +
                                        std::to_string(style.channels()));
    }
    const AffineTransform t = make_transform(flags.kind(), estimate_stats(content.features),
                                             estimate_stats(style), flags.ridge);
    const FeatureMap moved = apply_transform(content.features, t, flags.alpha);
    write_tensor(moved, output, parse_dtype(dtype), content.spatial);
    return kExitOk;
}

int cmd_semantic(const std::string& content_path, const std::string& style_path,
                 const std::string& mask_c_path, const std::string& mask_s_path,
                 const TransformFlags& flags, const std::string& dtype, const std::string& output) {
    const TensorFile content = read_tensor_file(content_path);
    const TensorFile style = read_tensor_file(style_path);
    const RegionMask mask_c =
        align_mask(read_labels(mask_c_path), content.features.positions(), content.spatial);
    const RegionMask mask_s =
        align_mask(read_labels(mask_s_path), style.features.positions(), style.spatial);
    const FeatureMap moved = semantic_transform(content.features, style.features, mask_c, mask_s,
                                                flags.kind(), flags.alpha, flags.ridge);
    write_tensor(moved, output, parse_dtype(dtype), content.spatial);
    return kExitOk;
}

int cmd_eval(const std::string& content_path, const std::string& stylized_path,
             const std::string& style_path, const std::string& layer, std::ostream& out) {
    const FeatureMap content = read_tensor(content_path);
    const FeatureMap stylized = read_tensor(stylized_path);
    const FeatureMap style = read_tensor(style_path);
    Json j;
    j["content_loss"] = content_loss(content, stylized);
    Json layer_loss;
    layer_loss["layer"] = layer;
    layer_loss["style_loss"] = style_loss(stylized, style);
    j["style_losses"] = Json::array({layer_loss});
    print_json(out, j);
    return kExitOk;
}

int cmd_compare(const std::string& content_path, const std::string& style_path,
                std::size_t rotations, std::uint64_t seed, double ridge, double alpha,
                std::ostream& out) {
    const FeatureMap content = read_tensor(content_path);
    const FeatureMap style = read_tensor(style_path);
    if (content.channels() != style.channels()) {
        fail(ErrorCode::ShapeError, "content and style channel counts differ");
    }
    const GaussianStats c = estimate_stats(content);
    const GaussianStats s = estimate_stats(style);

    Json records = Json::array();
    const auto run_one = [&](const std::string& name, auto&& build) {
        const auto start = Clock::now();
        const AffineTransform t = build();
        const double ms = elapsed_ms(start);
        return method_record(name, t, c, s, content, style, alpha, ms);
    };
    records.push_back(run_one("ost", [&] { return ost_map(c, s, ridge); }));
    records.push_back(run_one("wct", [&] { return wct_map(c, s, ridge); }));
    records.push_back(run_one("adain", [&] { return adain_map(c, s); }));

    if (rotations > 0) {
        const RotationFamily family(c, s, ridge);
        for (std::size_t k = 0; k < rotations; ++k) {
            const std::uint64_t rotation_seed = seed + k;
            Json rec = run_one("rotated-wct", [&] {
                return family.map(random_orthogonal(c.dim(), rotation_seed));
            });
            Json ordered;
            for (auto it = rec.begin(); it != rec.end(); ++it) {
                ordered[it.key()] = it.value();
                if (it.key() == "method") ordered["seed"] = rotation_seed;
            }
            records.push_back(std::move(ordered));
        }
    }

    Json j;
    j["environment"] = {{"seed", seed}, {"ridge", ridge}, {"alpha", alpha}, {"rotations", rotations}};
    j["methods"] = std::move(records);
    print_json(out, j);
    return kExitOk;
}

int cmd_whiten_compare(const std::string& content_path, double ridge, std::ostream& out) {
    const FeatureMap content = read_tensor(content_path);
    const GaussianStats c = estimate_stats(content);
    Matrix centered = content.data();
    for (std::size_t r = 0; r < centered.rows(); ++r) {
        for (double& v : centered.row(r)) v -= c.mean[r];
    }
    const Matrix identity = Matrix::identity(c.dim());
    const double n = static_cast<double>(content.positions());

    Json records = Json::array();
    for (WhiteningMethod method :
         {WhiteningMethod::ZCA, WhiteningMethod::PCA, WhiteningMethod::Cholesky}) {
        const auto start = Clock::now();
        const AffineTransform w = whiten_map(c, method, ridge);
        const double ms = elapsed_ms(start);
        const Matrix implied = w.matrix * c.cov.matrix() * w.matrix.transposed();
        const double disp = frobenius_norm(w.matrix * centered - centered);
        Json rec;
        rec["method"] = std::string(to_string(method));
        rec["whitening_residual"] = frobenius_norm(implied - identity);
        rec["displacement"] = disp * disp / n;
        rec["wall_time_ms"] = ms;
        records.push_back(std::move(rec));
    }
    Json j;
    j["environment"] = {{"ridge", ridge}};
    j["methods"] = std::move(records);
    print_json(out, j);
    return kExitOk;
}

}  // namespace

const std::vector<std::string>& method_names() {
    static const std::vector<std::string> names{
        "ost", "wct", "adain", "rotated-wct", "whiten-zca", "whiten-pca", "whiten-cholesky"};
    return names;
}

std::optional<TransformKind> parse_method(const std::string& name, std::uint64_t seed) {
    if (name == "ost") return kind::Ost{};
    if (name == "wct") return kind::Wct{};
    if (name == "adain") return kind::AdaIn{};
    if (name == "rotated-wct") return kind::RotatedWct{seed};
    if (name == "whiten-zca") return kind::WhitenOnly{WhiteningMethod::ZCA};
    if (name == "whiten-pca") return kind::WhitenOnly{WhiteningMethod::PCA};
    if (name == "whiten-cholesky") return kind::WhitenOnly{WhiteningMethod::Cholesky};
    return std::nullopt;
}

RegionMask align_mask(const LabelTensor& mask, std::size_t positions,
                      const std::optional<SpatialShape>& spatial) {
    if (mask.shape.size() == 1) {
        if (mask.shape[0] != positions) {
            fail(ErrorCode::ShapeError, "mask has " + std::to_string(mask.shape[0]) +
                                            " labels but features have " +
                                            std::to_string(positions) + " positions");
        }
        return RegionMask(mask.labels);
    }
    if (mask.shape.size() != 2) {
        fail(ErrorCode::ShapeError, "mask must have shape (N,) or (H, W)");
    }
    const std::size_t mh = mask.shape[0];
    const std::size_t mw = mask.shape[1];
    if (!spatial) {
        if (mh * mw != positions) {
            fail(ErrorCode::ShapeError, "mask covers " + std::to_string(mh * mw) +
                                            " positions but features have " +
                                            std::to_string(positions));
        }
        return RegionMask(mask.labels);
    }
    if (mh == 0 || mw == 0) {
        fail(ErrorCode::ShapeError, "mask has an empty dimension");
    }
    std::vector<std::int64_t> labels(spatial->height * spatial->width);
    for (std::size_t y = 0; y < spatial->height; ++y) {
        const std::size_t sy = y * mh / spatial->height;
        for (std::size_t x = 0; x < spatial->width; ++x) {
            const std::size_t sx = x * mw / spatial->width;
            labels[y * spatial->width + x] = mask.labels[sy * mw + sx];
        }
    }
    return RegionMask(std::move(labels));
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Closed-form Gaussian transport transforms for style and color transfer",
                 "gaussot"};
    app.require_subcommand(1);

    TransformFlags flags;
    std::string content, style, stylized, mask_c, mask_s, output;
    std::string colorspace = "rgb";
    std::string dtype = "f8";
    std::string layer = "features";
    std::size_t rotations = 0;

    auto* color = app.add_subcommand("color-transfer", "Transfer color statistics between PNGs");
    color->add_option("content", content, "Content PNG")->required();
    color->add_option("style", style, "Style PNG")->required();
    color->add_option("-o,--output", output, "Output PNG")->required();
    color->add_option("--colorspace", colorspace, "Working color space")
        ->check(CLI::IsMember({"rgb", "lab"}))
        ->capture_default_str();
    flags.attach(*color);

    auto* feature = app.add_subcommand("feature-transform", "Transform a content feature tensor");
    feature->add_option("content", content, "Content features (.npy)")->required();
    feature->add_option("style", style, "Style features (.npy)")->required();
    feature->add_option("-o,--output", output, "Output features (.npy)")->required();
    feature->add_option("--dtype", dtype, "Output dtype")
        ->check(CLI::IsMember({"f4", "f8"}))
        ->capture_default_str();
    flags.attach(*feature);

    auto* semantic = app.add_subcommand("semantic", "Region-wise transform guided by label masks");
    semantic->add_option("content", content, "Content features (.npy)")->required();
    semantic->add_option("style", style, "Style features (.npy)")->required();
    semantic->add_option("content_mask", mask_c, "Content labels (.npy)")->required();
    semantic->add_option("style_mask", mask_s, "Style labels (.npy)")->required();
    semantic->add_option("-o,--output", output, "Output features (.npy)")->required();
    semantic->add_option("--dtype", dtype, "Output dtype")
        ->check(CLI::IsMember({"f4", "f8"}))
        ->capture_default_str();
    flags.attach(*semantic);

    auto* eval = app.add_subcommand("eval", "Content and style losses as JSON");
    eval->add_option("content", content, "Content features (.npy)")->required();
    eval->add_option("stylized", stylized, "Stylized features (.npy)")->required();
    eval->add_option("style", style, "Style features (.npy)")->required();
    eval->add_option("--layer", layer, "Layer name reported with the style loss")
        ->capture_default_str();

    auto* compare = app.add_subcommand("compare", "Compare OST, WCT, AdaIN and rotated WCT maps");
    compare->add_option("content", content, "Content features (.npy)")->required();
    compare->add_option("style", style, "Style features (.npy)")->required();
    compare->add_option("--rotations", rotations, "Number of seeded rotated-WCT maps")
        ->capture_default_str();
    compare->add_option("--seed", flags.seed, "Seed of the first rotation")->capture_default_str();
    compare->add_option("--ridge", flags.ridge, "Relative ridge")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    compare->add_option("--alpha", flags.alpha, "Blend weight used for the loss columns")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();

    auto* whiten = app.add_subcommand("whiten-compare", "Compare ZCA, PCA and Cholesky whitening");
    whiten->add_option("content", content, "Content features (.npy)")->required();
    whiten->add_option("--ridge", flags.ridge, "Relative ridge")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: UsageError: " << one_line(e.what()) << '\n';
        return kExitUsage;
    }

    try {
        if (color->parsed()) return cmd_color_transfer(content, style, flags, colorspace, output);
        if (feature->parsed()) return cmd_feature_transform(content, style, flags, dtype, output);
        if (semantic->parsed()) {
            return cmd_semantic(content, style, mask_c, mask_s, flags, dtype, output);
        }
        if (eval->parsed()) return cmd_eval(content, stylized, style, layer, out);
        if (compare->parsed()) {
            return cmd_compare(content, style, rotations, flags.seed, flags.ridge, flags.alpha, out);
        }
        if (whiten->parsed()) return cmd_whiten_compare(content, flags.ridge, out);
    } catch (const Error& e) {
        err << "error: " << to_string(e.code()) << ": " << one_line(e.what()) << '\n';
        return kExitDataError;
    } catch (const std::exception& e) {
        err << "error: InternalError: " << one_line(e.what()) << '\n';
        return kExitDataError;
    }
    return kExitUsage;
}

}  // namespace gaussot::cli
