#include "moprox/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

namespace moprox {

GrayImage::GrayImage(int w, int h, Vector px) : width(w), height(h), pixels(std::move(px)) {
    if (w < 1 || h < 1) throw ArgumentError("image: width and height must be positive");
    require_dimension(pixels.size(), static_cast<Eigen::Index>(w) * h, "image pixels");
}

namespace {

class PgmReader {
public:
    explicit PgmReader(std::string_view bytes) : bytes_(bytes) {}

    std::size_t pos() const { return pos_; }

    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            const char c = bytes_[pos_];
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    unsigned long number(const char* what) {
        skip_space_and_comments();
        const std::size_t start = pos_;
        unsigned long value = 0;
        while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
            value = value * 10 + static_cast<unsigned long>(bytes_[pos_] - '0');
            if (value > 1'000'000'000UL) throw ParseError(std::string("pgm: ") + what + " too large", start);
            ++pos_;
        }
        if (pos_ == start) {
            throw ParseError(std::string("pgm: expected ") + what + (pos_ >= bytes_.size() ? ", got end of file" : ""),
                             pos_);
        }
        return value;
    }

    unsigned char byte() {
        if (pos_ >= bytes_.size()) throw ParseError("pgm: truncated pixel data", pos_);
        return static_cast<unsigned char>(bytes_[pos_++]);
    }

    void single_whitespace() {
        if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
            throw ParseError("pgm: expected whitespace after maxval", pos_);
        }
        ++pos_;
    }

private:
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

void require_power_of_two(int width, int height) {
    if (!is_power_of_two(width) || !is_power_of_two(height)) {
        throw ArgumentError("haar: width and height must be powers of two (got " + std::to_string(width) + "x" +
                            std::to_string(height) + ")");
    }
}

int haar_levels(int width, int height) {
    int levels = 0;
    for (int s = std::min(width, height); s > 1; s >>= 1) ++levels;
    return levels;
}

// One analysis step on `len` entries spaced by `stride`: averages first, details second.
void haar_step(double* data, int len, int stride, std::vector<double>& scratch) {
    const int half = len / 2;
    scratch.resize(static_cast<std::size_t>(len));
    for (int i = 0; i < half; ++i) {
        const double a = data[(2 * i) * stride];
        const double b = data[(2 * i + 1) * stride];
        scratch[static_cast<std::size_t>(i)] = (a + b) * M_SQRT1_2;
        scratch[static_cast<std::size_t>(half + i)] = (a - b) * M_SQRT1_2;
    }
    for (int i = 0; i < len; ++i) data[i * stride] = scratch[static_cast<std::size_t>(i)];
}

void haar_unstep(double* data, int len, int stride, std::vector<double>& scratch) {
    const int half = len / 2;
    scratch.resize(static_cast<std::size_t>(len));
    for (int i = 0; i < half; ++i) {
        const double s = data[i * stride];
        const double d = data[(half + i) * stride];
        scratch[static_cast<std::size_t>(2 * i)] = (s + d) * M_SQRT1_2;
        scratch[static_cast<std::size_t>(2 * i + 1)] = (s - d) * M_SQRT1_2;
    }
    for (int i = 0; i < len; ++i) data[i * stride] = scratch[static_cast<std::size_t>(i)];
}

// Zero-padded 1-D correlation along rows (axis 0) or columns (axis 1). `flip` turns
// it into the adjoint.
Vector filter_axis(const Vector& in, int width, int height, const std::vector<double>& kernel, bool along_rows,
                   bool flip) {
    const int radius = static_cast<int>(kernel.size()) / 2;
    Vector out = Vector::Zero(in.size());
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                const int offset = flip ? -k : k;
                const int rr = along_rows ? r : r + offset;
                const int cc = along_rows ? c + offset : c;
                if (rr < 0 || rr >= height || cc < 0 || cc >= width) continue;
                acc += kernel[static_cast<std::size_t>(k + radius)] * in[static_cast<Eigen::Index>(rr) * width + cc];
            }
            out[static_cast<Eigen::Index>(r) * width + c] = acc;
        }
    }
    return out;
}

}  // namespace

GrayImage parse_pgm(std::string_view bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5')) {
        throw ParseError("pgm: missing P2/P5 magic number", 0);
    }
    const bool binary = bytes[1] == '5';
    PgmReader body(bytes);
    body.byte();
    body.byte();
    const auto width = body.number("width");
    const auto height = body.number("height");
    const auto maxval = body.number("maxval");
    if (width == 0 || height == 0) throw ParseError("pgm: zero image dimension", body.pos());
    if (maxval == 0 || maxval > 65535) throw ParseError("pgm: maxval must be in [1, 65535]", body.pos());
    if (width * height > (1UL << 28)) throw ParseError("pgm: image too large", body.pos());

    const Eigen::Index count = static_cast<Eigen::Index>(width * height);
    Vector pixels(count);
    const double scale = 1.0 / static_cast<double>(maxval);
    if (binary) {
        body.single_whitespace();
        for (Eigen::Index p = 0; p < count; ++p) {
            unsigned long v = body.byte();
            if (maxval > 255) v = (v << 8) | body.byte();
            if (v > maxval) throw ParseError("pgm: sample exceeds maxval", body.pos());
            pixels[p] = static_cast<double>(v) * scale;
        }
    } else {
        for (Eigen::Index p = 0; p < count; ++p) {
            const auto v = body.number("pixel value");
            if (v > maxval) throw ParseError("pgm: sample exceeds maxval", body.pos());
            pixels[p] = static_cast<double>(v) * scale;
        }
    }
    return GrayImage(static_cast<int>(width), static_cast<int>(height), std::move(pixels));
}

GrayImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_pgm(buffer.str());
}

std::string encode_pgm(const GrayImage& image) {
    std::string out = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
    out.reserve(out.size() + static_cast<std::size_t>(image.pixels.size()));
    for (Eigen::Index p = 0; p < image.pixels.size(); ++p) {
        const double v = std::clamp(image.pixels[p], 0.0, 1.0) * 255.0;
        // nearbyint honours the default round-to-nearest-even mode.
        out.push_back(static_cast<char>(static_cast<unsigned char>(std::nearbyint(v))));
    }
    return out;
}

void write_pgm(const GrayImage& image, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    const std::string bytes = encode_pgm(image);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Vector haar_forward(const GrayImage& image) {
    require_power_of_two(image.width, image.height);
    Vector c = image.pixels;
    std::vector<double> scratch;
    int w = image.width;
    int h = image.height;
    for (int level = haar_levels(image.width, image.height); level > 0; --level) {
        for (int r = 0; r < h; ++r) haar_step(c.data() + static_cast<Eigen::Index>(r) * image.width, w, 1, scratch);
        for (int col = 0; col < w; ++col) haar_step(c.data() + col, h, image.width, scratch);
        w /= 2;
        h /= 2;
    }
    return c;
}

GrayImage haar_inverse(const Vector& coeffs, int width, int height) {
    require_power_of_two(width, height);
    require_dimension(coeffs.size(), static_cast<Eigen::Index>(width) * height, "haar_inverse");
    Vector c = coeffs;
    std::vector<double> scratch;
    const int levels = haar_levels(width, height);
    for (int level = levels - 1; level >= 0; --level) {
        const int w = width >> level;
        const int h = height >> level;
        for (int col = 0; col < w; ++col) haar_unstep(c.data() + col, h, width, scratch);
        for (int r = 0; r < h; ++r) haar_unstep(c.data() + static_cast<Eigen::Index>(r) * width, w, 1, scratch);
    }
    return GrayImage(width, height, std::move(c));
}

LinearOperatorPair make_blur(int width, int height, int kernel_size, double sigma) {
    if (width < 1 || height < 1) throw ArgumentError("blur: width and height must be positive");
    if (kernel_size < 1 || kernel_size % 2 == 0) throw ArgumentError("blur: kernel_size must be a positive odd integer");
    if (!(sigma > 0.0)) throw ArgumentError("blur: sigma must be positive");
    const int radius = kernel_size / 2;
    std::vector<double> kernel(static_cast<std::size_t>(kernel_size));
    double total = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        const double v = std::exp(-0.5 * k * k / (sigma * sigma));
        kernel[static_cast<std::size_t>(k + radius)] = v;
        total += v;
    }
    for (double& v : kernel) v /= total;

    LinearOperatorPair op;
    op.apply = [=](const Vector& x) {
        require_dimension(x.size(), static_cast<Eigen::Index>(width) * height, "blur");
        return filter_axis(filter_axis(x, width, height, kernel, true, false), width, height, kernel, false, false);
    };
    op.apply_adjoint = [=](const Vector& x) {
        require_dimension(x.size(), static_cast<Eigen::Index>(width) * height, "blur adjoint");
        return filter_axis(filter_axis(x, width, height, kernel, false, true), width, height, kernel, true, true);
    };
    op.op_norm_sq_estimate = estimate_op_norm_sq(op, static_cast<Eigen::Index>(width) * height);
    return op;
}

double estimate_op_norm_sq(const LinearOperatorPair& op, Eigen::Index n, int iterations, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector v(n);
    for (Eigen::Index j = 0; j < n; ++j) v[j] = normal(rng);
    v.normalize();
    double eig = 0.0;
    for (int it = 0; it < iterations; ++it) {
        Vector w = op.apply_adjoint(op.apply(v));
        eig = v.dot(w);
        const double norm = w.norm();
        if (norm == 0.0) return 0.0;
        v = w / norm;
    }
    return eig;
}

GrayImage make_observed(const GrayImage& image, const LinearOperatorPair& blur, double noise_sigma,
                        std::uint64_t seed) {
    if (!(noise_sigma >= 0.0)) throw ArgumentError("make_observed: noise_sigma must be nonnegative");
    Vector b = blur.apply(image.pixels);
    if (noise_sigma > 0.0) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal(0.0, noise_sigma);
        for (Eigen::Index p = 0; p < b.size(); ++p) b[p] += normal(rng);
    }
    return GrayImage(image.width, image.height, std::move(b));
}

GrayImage synthetic_image(int size) {
    if (size < 2) throw ArgumentError("synthetic_image: size must be at least 2");
    GrayImage img(size, size, Vector::Zero(static_cast<Eigen::Index>(size) * size));
    const int cell = std::max(1, size / 4);
    for (int r = 0; r < size; ++r) {
        for (int c = 0; c < size; ++c) {
            const double checker = ((r / cell + c / cell) % 2 == 0) ? 1.0 : 0.0;
            const double ramp = static_cast<double>(r + c) / (2.0 * (size - 1));
            img.at(r, c) = 0.6 * checker + 0.4 * ramp;
        }
    }
    return img;
}

}  // namespace moprox
