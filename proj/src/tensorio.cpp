#include "gaussot/tensorio.hpp"

#include "gaussot/error.hpp"

#include <bit>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>

namespace gaussot {

namespace {

static_assert(std::endian::native == std::endian::little,
              "tensor IO assumes a little-endian host");

constexpr char kMagic[] = "\x93NUMPY";
constexpr std::size_t kMagicLen = 6;
constexpr std::size_t kAlignment = 64;

struct Header {
    std::string descr;
    bool fortran_order = false;
    std::vector<std::size_t> shape;
};

struct RawArray {
    Header header;
    std::vector<char> payload;
};

// Parser for the Python dict literal stored in the header, e.g.
// {'descr': '<f8', 'fortran_order': False, 'shape': (3, 4), }
class HeaderParser {
public:
    HeaderParser(std::string_view text, const std::string& where) : s_(text), where_(where) {}

    Header parse() {
        Header h;
        bool seen_descr = false, seen_order = false, seen_shape = false;
        expect('{');
        while (true) {
            skip_ws();
            if (peek() == '}') {
                ++pos_;
                break;
            }
            const std::string key = parse_string();
            expect(':');
            if (key == "descr") {
                h.descr = parse_string();
                seen_descr = true;
            } else if (key == "fortran_order") {
                h.fortran_order = parse_bool();
                seen_order = true;
            } else if (key == "shape") {
                h.shape = parse_tuple();
                seen_shape = true;
            } else {
                bad("unexpected header key '" + key + "'");
            }
            skip_ws();
            if (peek() == ',') {
                ++pos_;
            } else if (peek() != '}') {
                bad("expected ',' or '}'");
            }
        }
        if (!seen_descr || !seen_order || !seen_shape) bad("header is missing a required key");
        return h;
    }

private:
    [[noreturn]] void bad(const std::string& what) const {
        fail(ErrorCode::FormatError, where_ + ": malformed NPY header: " + what);
    }

    char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    void expect(char ch) {
        skip_ws();
        if (peek() != ch) bad(std::string("expected '") + ch + "'");
        ++pos_;
    }

    std::string parse_string() {
        skip_ws();
        const char quote = peek();
        if (quote != '\'' && quote != '"') bad("expected string");
        ++pos_;
        const std::size_t end = s_.find(quote, pos_);
        if (end == std::string_view::npos) bad("unterminated string");
        std::string out(s_.substr(pos_, end - pos_));
        pos_ = end + 1;
        return out;
    }

    bool parse_bool() {
        skip_ws();
        if (s_.substr(pos_, 4) == "True") {
            pos_ += 4;
            return true;
        }
        if (s_.substr(pos_, 5) == "False") {
            pos_ += 5;
            return false;
        }
        bad("expected True or False");
    }

    std::vector<std::size_t> parse_tuple() {
        expect('(');
        std::vector<std::size_t> dims;
        while (true) {
            skip_ws();
            if (peek() == ')') {
                ++pos_;
                return dims;
            }
            if (!std::isdigit(static_cast<unsigned char>(peek()))) bad("expected dimension");
            std::size_t v = 0;
            while (std::isdigit(static_cast<unsigned char>(peek()))) {
                v = v * 10 + static_cast<std::size_t>(s_[pos_] - '0');
                ++pos_;
            }
            // Python writes an 'L' suffix for longs in very old files.
            if (peek() == 'L') ++pos_;
            dims.push_back(v);
            skip_ws();
            if (peek() == ',') ++pos_;
        }
    }

    std::string_view s_;
    std::string where_;
    std::size_t pos_ = 0;
};

std::size_t element_size(const std::string& descr) {
    if (descr.size() < 3) return 0;
    try {
        return static_cast<std::size_t>(std::stoul(descr.substr(2)));
    } catch (const std::exception&) {
        return 0;
    }
}

RawArray read_raw(const std::filesystem::path& path) {
    const std::string where = path.string();
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorCode::IoError, where + ": cannot open for reading");
    }
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (bytes.size() < kMagicLen + 4 || std::memcmp(bytes.data(), kMagic, kMagicLen) != 0) {
        fail(ErrorCode::FormatError, where + ": not an NPY file (bad magic)");
    }
    const auto major = static_cast<unsigned char>(bytes[6]);
    const auto minor = static_cast<unsigned char>(bytes[7]);
    if (major != 1 || minor != 0) {
        fail(ErrorCode::FormatError, where + ": unsupported NPY version " + std::to_string(major) +
                                         "." + std::to_string(minor) + " (only 1.0)");
    }
    const std::size_t header_len = static_cast<unsigned char>(bytes[8]) |
                                   (static_cast<std::size_t>(static_cast<unsigned char>(bytes[9])) << 8);
    const std::size_t data_start = 10 + header_len;
    if (bytes.size() < data_start) {
        fail(ErrorCode::FormatError, where + ": truncated header");
    }
    Header header =
        HeaderParser(std::string_view(bytes.data() + 10, header_len), where).parse();

    std::size_t count = 1;
    for (std::size_t d : header.shape) count *= d;
    const std::size_t width = element_size(header.descr);
    if (width == 0) {
        fail(ErrorCode::UnsupportedTensor, where + ": unsupported dtype '" + header.descr + "'");
    }
    if (bytes.size() - data_start < count * width) {
        fail(ErrorCode::FormatError, where + ": payload shorter than header shape implies");
    }
    RawArray raw{std::move(header), {}};
    raw.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(data_start),
                       bytes.begin() + static_cast<std::ptrdiff_t>(data_start + count * width));
    return raw;
}

std::string shape_literal(std::span<const std::size_t> shape) {
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        s += std::to_string(shape[i]);
        if (shape.size() == 1 || i + 1 < shape.size()) s += ",";
        if (i + 1 < shape.size()) s += " ";
    }
    return s + ")";
}

void write_raw(const std::filesystem::path& path, const std::string& descr,
               std::span<const std::size_t> shape, std::span<const char> payload) {
    std::string dict = "{'descr': '" + descr + "', 'fortran_order': False, 'shape': " +
                       shape_literal(shape) + ", }";
    const std::size_t unpadded = kMagicLen + 4 + dict.size() + 1;
    const std::size_t padding = (kAlignment - unpadded % kAlignment) % kAlignment;
    dict.append(padding, ' ');
    dict.push_back('\n');

    const std::string where = path.string();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        fail(ErrorCode::IoError, where + ": cannot open for writing");
    }
    const auto header_len = static_cast<std::uint16_t>(dict.size());
    out.write(kMagic, kMagicLen);
    out.put('\x01');
    out.put('\x00');
    out.put(static_cast<char>(header_len & 0xff));
    out.put(static_cast<char>(header_len >> 8));
    out.write(dict.data(), static_cast<std::streamsize>(dict.size()));
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    out.flush();
    if (!out) {
        fail(ErrorCode::IoError, where + ": write failed");
    }
}

template <class T>
T load_le(const char* p) {
    T v;
    std::memcpy(&v, p, sizeof(T));
    return v;
}

}  // namespace

TensorFile read_tensor_file(const std::filesystem::path& path) {
    const std::string where = path.string();
    const RawArray raw = read_raw(path);
    const Header& h = raw.header;
    if (h.descr != "<f4" && h.descr != "<f8") {
        fail(ErrorCode::UnsupportedTensor,
             where + ": dtype '" + h.descr + "' is not supported (expected <f4 or <f8)");
    }
    if (h.fortran_order) {
        fail(ErrorCode::UnsupportedTensor, where + ": Fortran-ordered arrays are not supported");
    }
    if (h.shape.size() != 2 && h.shape.size() != 3) {
        fail(ErrorCode::ShapeError, where + ": expected shape (C, N) or (C, H, W), got rank " +
                                        std::to_string(h.shape.size()));
    }
    const std::size_t channels = h.shape[0];
    std::size_t positions = 1;
    for (std::size_t i = 1; i < h.shape.size(); ++i) positions *= h.shape[i];
    if (channels == 0 || positions == 0) {
        fail(ErrorCode::ShapeError, where + ": tensor has an empty dimension");
    }

    std::vector<double> values(channels * positions);
    if (h.descr == "<f8") {
        std::memcpy(values.data(), raw.payload.data(), values.size() * sizeof(double));
    } else {
        for (std::size_t i = 0; i < values.size(); ++i) {
            values[i] = static_cast<double>(load_le<float>(raw.payload.data() + i * sizeof(float)));
        }
    }

    std::optional<SpatialShape> spatial;
    if (h.shape.size() == 3) spatial = SpatialShape{h.shape[1], h.shape[2]};
    try {
        return TensorFile{FeatureMap(Matrix(channels, positions, std::move(values))), spatial};
    } catch (const Error& e) {
        fail(e.code(), where + ": " + e.what());
    }
}

FeatureMap read_tensor(const std::filesystem::path& path) {
    return read_tensor_file(path).features;
}

void write_tensor(const FeatureMap& f, const std::filesystem::path& path, DType dtype,
                  std::optional<SpatialShape> spatial) {
    std::vector<std::size_t> shape{f.channels(), f.positions()};
    if (spatial) {
        if (spatial->height * spatial->width != f.positions()) {
            fail(ErrorCode::ShapeError, path.string() + ": spatial shape " +
                                            std::to_string(spatial->height) + "x" +
                                            std::to_string(spatial->width) +
                                            " does not cover " + std::to_string(f.positions()) +
                                            " positions");
        }
        shape = {f.channels(), spatial->height, spatial->width};
    }

    const auto values = f.data().values();
    std::vector<char> payload;
    if (dtype == DType::F8) {
        payload.resize(values.size() * sizeof(double));
        std::memcpy(payload.data(), values.data(), payload.size());
        write_raw(path, "<f8", shape, payload);
    } else {
        payload.resize(values.size() * sizeof(float));
        for (std::size_t i = 0; i < values.size(); ++i) {
            const float v = static_cast<float>(values[i]);
            std::memcpy(payload.data() + i * sizeof(float), &v, sizeof(float));
        }
        write_raw(path, "<f4", shape, payload);
    }
}

LabelTensor read_labels(const std::filesystem::path& path) {
    const std::string where = path.string();
    const RawArray raw = read_raw(path);
    const Header& h = raw.header;
    if (h.fortran_order) {
        fail(ErrorCode::UnsupportedTensor, where + ": Fortran-ordered arrays are not supported");
    }
    const std::string& d = h.descr;
    const bool little = d[0] == '<' || d[0] == '|';
    const char kind = d.size() >= 2 ? d[1] : '?';
    const std::size_t width = element_size(d);
    if (!little || (kind != 'i' && kind != 'u' && kind != 'b') ||
        (width != 1 && width != 2 && width != 4 && width != 8)) {
        fail(ErrorCode::UnsupportedTensor,
             where + ": label dtype '" + d + "' is not an integer type");
    }

    std::size_t count = 1;
    for (std::size_t dim : h.shape) count *= dim;
    LabelTensor out{std::vector<std::int64_t>(count), h.shape};
    const char* p = raw.payload.data();
    for (std::size_t i = 0; i < count; ++i, p += width) {
        std::int64_t v = 0;
        if (kind == 'i') {
            switch (width) {
                case 1: v = load_le<std::int8_t>(p); break;
                case 2: v = load_le<std::int16_t>(p); break;
                case 4: v = load_le<std::int32_t>(p); break;
                default: v = load_le<std::int64_t>(p); break;
            }
        } else {
            std::uint64_t u = 0;
            switch (width) {
                case 1: u = load_le<std::uint8_t>(p); break;
                case 2: u = load_le<std::uint16_t>(p); break;
                case 4: u = load_le<std::uint32_t>(p); break;
                default: u = load_le<std::uint64_t>(p); break;
            }
            v = static_cast<std::int64_t>(u);
        }
        out.labels[i] = v;
    }
    return out;
}

void write_labels(std::span<const std::int64_t> labels, std::span<const std::size_t> shape,
                  const std::filesystem::path& path) {
    std::size_t count = 1;
    for (std::size_t d : shape) count *= d;
    if (count != labels.size()) {
        fail(ErrorCode::ShapeError, path.string() + ": label count does not match shape");
    }
    std::vector<char> payload(labels.size() * sizeof(std::int64_t));
    std::memcpy(payload.data(), labels.data(), payload.size());
    write_raw(path, "<i8", shape, payload);
}

}  // namespace gaussot
