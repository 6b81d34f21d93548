#include "kssc/data.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

#include "kssc/rng.hpp"

namespace kssc {

namespace {

constexpr char kMagic[4] = {'K', 'S', 'C', '1'};

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    size_t start = 0;
    while (true) {
        const size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(trim(line.substr(start)));
            break;
        }
        fields.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return fields;
}

bool parse_double(const std::string& field, double& out) {
    const char* begin = field.data();
    const char* end = begin + field.size();
    const auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end && !field.empty();
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

Matrix load_matrix_csv(const std::string& path, bool allow_empty) {
    const std::vector<std::string> lines = read_lines(path);

    std::vector<std::vector<double>> rows;  // one per sample
    Eigen::Index width = -1;
    bool first_content = true;
    for (size_t li = 0; li < lines.size(); ++li) {
        const std::string line = trim(lines[li]);
        if (line.empty()) continue;
        const bool may_be_header = first_content;
        first_content = false;
        const std::vector<std::string> fields = split_fields(line);

        std::vector<double> row(fields.size());
        bool numeric = true;
        for (size_t f = 0; f < fields.size(); ++f)
            if (!parse_double(fields[f], row[f])) {
                numeric = false;
                break;
            }
        if (!numeric) {
            if (may_be_header) continue;
            throw ParseError("'" + path + "' line " + std::to_string(li + 1) +
                             ": malformed numeric field");
        }
        for (double v : row)
            if (!std::isfinite(v))
                throw ParseError("'" + path + "' line " + std::to_string(li + 1) +
                                 ": non-finite value");
        if (width == -1) {
            width = static_cast<Eigen::Index>(row.size());
        } else if (static_cast<Eigen::Index>(row.size()) != width) {
            throw ParseError("'" + path + "' line " + std::to_string(li + 1) + ": expected " +
                             std::to_string(width) + " fields, got " +
                             std::to_string(row.size()));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        if (allow_empty) return Matrix(0, 0);
        throw ParseError("'" + path + "': no data rows");
    }

    // file rows are samples; columns of the returned matrix are samples
    Matrix x(width, static_cast<Eigen::Index>(rows.size()));
    for (size_t j = 0; j < rows.size(); ++j)
        for (Eigen::Index i = 0; i < width; ++i)
            x(i, static_cast<Eigen::Index>(j)) = rows[j][static_cast<size_t>(i)];
    return x;
}

void save_matrix_csv(const std::string& path, const Matrix& x) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    char buf[40];
    for (Eigen::Index j = 0; j < x.cols(); ++j) {  // one row per sample
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", x(i, j));
            out << buf;
            if (i + 1 < x.rows()) out << ',';
        }
        out << '\n';
    }
    if (!out) throw IoError("write to '" + path + "' failed");
}

std::uint64_t decode_u64le(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

void encode_u64le(std::uint64_t v, unsigned char* p) {
    for (int i = 0; i < 8; ++i) p[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
}

Matrix load_matrix_raw(const std::string& path, bool allow_empty) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    char magic[4];
    unsigned char header[16];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw ParseError("'" + path + "': bad magic, not a raw matrix file");
    if (!in.read(reinterpret_cast<char*>(header), 16))
        throw ParseError("'" + path + "': truncated header");
    const std::uint64_t d = decode_u64le(header);
    const std::uint64_t n = decode_u64le(header + 8);
    if (d > (1ull << 32) || n > (1ull << 32))
        throw ParseError("'" + path + "': implausible dimensions " + std::to_string(d) + "x" +
                         std::to_string(n));
    if ((d == 0 || n == 0) && !(allow_empty && n == 0))
        throw ParseError("'" + path + "': empty dimensions " + std::to_string(d) + "x" +
                         std::to_string(n));

    Matrix x(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n));
    if (x.size() == 0) return x;
    static_assert(sizeof(double) == 8);
    if constexpr (std::endian::native == std::endian::little) {
        if (!in.read(reinterpret_cast<char*>(x.data()),
                     static_cast<std::streamsize>(d * n * 8)))
            throw ParseError("'" + path + "': truncated payload");
    } else {
        std::vector<unsigned char> raw(d * n * 8);
        if (!in.read(reinterpret_cast<char*>(raw.data()),
                     static_cast<std::streamsize>(raw.size())))
            throw ParseError("'" + path + "': truncated payload");
        for (std::uint64_t k = 0; k < d * n; ++k) {
            const std::uint64_t bits = decode_u64le(raw.data() + k * 8);
            double v;
            std::memcpy(&v, &bits, 8);
            x.data()[k] = v;
        }
    }
    if (!x.allFinite()) throw ParseError("'" + path + "': non-finite value in payload");
    return x;
}

void save_matrix_raw(const std::string& path, const Matrix& x) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(kMagic, 4);
    unsigned char header[16];
    encode_u64le(static_cast<std::uint64_t>(x.rows()), header);
    encode_u64le(static_cast<std::uint64_t>(x.cols()), header + 8);
    out.write(reinterpret_cast<const char*>(header), 16);
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(x.data()),
                  static_cast<std::streamsize>(x.size()) * 8);
    } else {
        unsigned char buf[8];
        for (Eigen::Index k = 0; k < x.size(); ++k) {
            std::uint64_t bits;
            std::memcpy(&bits, &x.data()[k], 8);
            encode_u64le(bits, buf);
            out.write(reinterpret_cast<const char*>(buf), 8);
        }
    }
    if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace

MatrixFormat format_from_path(const std::string& path) {
    const size_t dot = path.find_last_of('.');
    if (dot != std::string::npos) {
        std::string ext = path.substr(dot + 1);
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (ext == "csv") return MatrixFormat::csv;
    }
    return MatrixFormat::raw_binary;
}

Matrix load_matrix(const std::string& path, MatrixFormat format, bool allow_empty) {
    return format == MatrixFormat::csv ? load_matrix_csv(path, allow_empty)
                                       : load_matrix_raw(path, allow_empty);
}

void save_matrix(const std::string& path, const Matrix& x, MatrixFormat format) {
    if (x.size() == 0) throw InvalidArgumentError("save_matrix: empty matrix");
    if (format == MatrixFormat::csv)
        save_matrix_csv(path, x);
    else
        save_matrix_raw(path, x);
}

std::vector<int> load_labels(const std::string& path) {
    const std::vector<std::string> lines = read_lines(path);
    std::vector<int> labels;
    bool first_content = true;
    for (size_t li = 0; li < lines.size(); ++li) {
        const std::string line = trim(lines[li]);
        if (line.empty()) continue;
        const bool may_be_header = first_content;
        first_content = false;
        int value = 0;
        const char* begin = line.data();
        const char* end = begin + line.size();
        const auto [ptr, ec] = std::from_chars(begin, end, value);
        if (ec != std::errc() || ptr != end) {
            if (may_be_header) continue;
            throw ParseError("'" + path + "' line " + std::to_string(li + 1) +
                             ": malformed label");
        }
        labels.push_back(value);
    }
    return labels;
}

void save_labels(const std::string& path, const std::vector<int>& labels) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    for (int lab : labels) out << lab << '\n';
    if (!out) throw IoError("write to '" + path + "' failed");
}

Matrix unit_normalize_columns(const Matrix& x) {
    Matrix out = x;
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
        const double norm = out.col(j).norm();
        if (norm == 0.0)
            throw DegenerateInputError("unit_normalize_columns: column " + std::to_string(j) +
                                       " is zero");
        out.col(j) /= norm;
    }
    return out;
}

namespace {

void fill_normal(Matrix& m, SplitMix64& rng) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.next_normal();
}

std::vector<int> balanced_labels(int c, int n_per_cluster) {
    std::vector<int> labels(static_cast<size_t>(c) * static_cast<size_t>(n_per_cluster));
    for (int m = 0; m < c; ++m)
        std::fill(labels.begin() + static_cast<std::ptrdiff_t>(m) * n_per_cluster,
                  labels.begin() + static_cast<std::ptrdiff_t>(m + 1) * n_per_cluster, m);
    return labels;
}

}  // namespace

LabeledDataset gen_union_subspaces(int d_ambient, int c, int dim_per_subspace,
                                   int n_per_cluster, double noise_sigma,
                                   std::uint64_t seed) {
    if (d_ambient < 1 || c < 1 || n_per_cluster < 1)
        throw InvalidArgumentError("gen_union_subspaces: dimensions must be positive");
    if (dim_per_subspace < 1 || dim_per_subspace >= d_ambient)
        throw InvalidArgumentError(
            "gen_union_subspaces: subspace dimension must lie in [1, D)");
    if (noise_sigma < 0.0)
        throw InvalidArgumentError("gen_union_subspaces: noise_sigma must be >= 0");

    LabeledDataset ds;
    ds.clusters = c;
    ds.labels = balanced_labels(c, n_per_cluster);
    ds.data.resize(d_ambient, static_cast<Eigen::Index>(c) * n_per_cluster);

    for (int m = 0; m < c; ++m) {
        SplitMix64 rng(seed, static_cast<std::uint64_t>(m));
        Matrix raw(d_ambient, dim_per_subspace);
        fill_normal(raw, rng);
        Eigen::HouseholderQR<Matrix> qr(raw);
        const Matrix basis =
            qr.householderQ() * Matrix::Identity(d_ambient, dim_per_subspace);

        Matrix coeff(dim_per_subspace, n_per_cluster);
        fill_normal(coeff, rng);
        Matrix block = basis * coeff;
        if (noise_sigma > 0.0) {
            Matrix noise(d_ambient, n_per_cluster);
            fill_normal(noise, rng);
            block += noise_sigma * noise;
        }
        ds.data.middleCols(static_cast<Eigen::Index>(m) * n_per_cluster, n_per_cluster) = block;
    }

    std::ostringstream params;
    params << "D=" << d_ambient << " c=" << c << " dim=" << dim_per_subspace
           << " n_per_cluster=" << n_per_cluster << " noise_sigma=" << noise_sigma;
    ds.provenance = {"union_subspaces", params.str(), seed};
    return ds;
}

LabeledDataset gen_concentric_circles(const std::vector<double>& radii, int n_per_cluster,
                                      double noise_sigma, std::uint64_t seed) {
    const int c = static_cast<int>(radii.size());
    if (c < 1) throw InvalidArgumentError("gen_concentric_circles: need at least one radius");
    if (n_per_cluster < 1)
        throw InvalidArgumentError("gen_concentric_circles: n_per_cluster must be positive");
    if (noise_sigma < 0.0)
        throw InvalidArgumentError("gen_concentric_circles: noise_sigma must be >= 0");
    for (size_t i = 0; i < radii.size(); ++i) {
        if (radii[i] <= 0.0)
            throw InvalidArgumentError("gen_concentric_circles: radii must be positive");
        for (size_t j = i + 1; j < radii.size(); ++j)
            if (radii[i] == radii[j])
                throw InvalidArgumentError("gen_concentric_circles: radii must be distinct");
    }

    LabeledDataset ds;
    ds.clusters = c;
    ds.labels = balanced_labels(c, n_per_cluster);
    ds.data.resize(2, static_cast<Eigen::Index>(c) * n_per_cluster);

    for (int m = 0; m < c; ++m) {
        SplitMix64 rng(seed, static_cast<std::uint64_t>(m));
        for (int k = 0; k < n_per_cluster; ++k) {
            const double angle = 2.0 * std::numbers::pi * rng.next_double();
            double px = radii[static_cast<size_t>(m)] * std::cos(angle);
            double py = radii[static_cast<size_t>(m)] * std::sin(angle);
            if (noise_sigma > 0.0) {
                px += noise_sigma * rng.next_normal();
                py += noise_sigma * rng.next_normal();
            }
            const Eigen::Index col = static_cast<Eigen::Index>(m) * n_per_cluster + k;
            ds.data(0, col) = px;
            ds.data(1, col) = py;
        }
    }

    std::ostringstream params;
    params << "radii=";
    for (size_t i = 0; i < radii.size(); ++i) params << (i ? "," : "") << radii[i];
    params << " n_per_cluster=" << n_per_cluster << " noise_sigma=" << noise_sigma;
    ds.provenance = {"concentric_circles", params.str(), seed};
    return ds;
}

LabeledDataset gen_polynomial_embedding(int d_ambient, int c, int n_per_cluster,
                                        double noise_sigma, std::uint64_t seed) {
    if (d_ambient < 1 || c < 1 || n_per_cluster < 1)
        throw InvalidArgumentError("gen_polynomial_embedding: dimensions must be positive");
    if (noise_sigma < 0.0)
        throw InvalidArgumentError("gen_polynomial_embedding: noise_sigma must be >= 0");

    LabeledDataset ds;
    ds.clusters = c;
    ds.labels = balanced_labels(c, n_per_cluster);
    ds.data.resize(d_ambient, static_cast<Eigen::Index>(c) * n_per_cluster);

    // Cluster m maps t to coordinates t^e with e = 1 + ((m + k) mod (c + 1))
    // in coordinate k: distinct monomial curves that share no subspace.
    for (int m = 0; m < c; ++m) {
        SplitMix64 rng(seed, static_cast<std::uint64_t>(m));
        for (int k = 0; k < n_per_cluster; ++k) {
            const double t = 2.0 * rng.next_double() - 1.0;
            const Eigen::Index col = static_cast<Eigen::Index>(m) * n_per_cluster + k;
            for (int i = 0; i < d_ambient; ++i) {
                const int exponent = 1 + (m + i) % (c + 1);
                double v = 1.0;
                for (int e = 0; e < exponent; ++e) v *= t;
                if (noise_sigma > 0.0) v += noise_sigma * rng.next_normal();
                ds.data(i, col) = v;
            }
        }
    }

    std::ostringstream params;
    params << "D=" << d_ambient << " c=" << c << " n_per_cluster=" << n_per_cluster
           << " noise_sigma=" << noise_sigma;
    ds.provenance = {"polynomial_embedding", params.str(), seed};
    return ds;
}

Matrix corrupt_sparse(const Matrix& x, double fraction, double magnitude,
                      std::uint64_t seed) {
    if (!(fraction >= 0.0 && fraction <= 1.0))
        throw InvalidArgumentError("corrupt_sparse: fraction must lie in [0, 1]");
    const auto total = static_cast<std::uint64_t>(x.size());
    const auto count =
        static_cast<std::uint64_t>(std::llround(fraction * static_cast<double>(total)));

    Matrix out = x;
    if (count == 0) return out;

    // partial Fisher-Yates over flattened entry indices
    std::vector<std::uint64_t> idx(total);
    for (std::uint64_t k = 0; k < total; ++k) idx[k] = k;
    SplitMix64 rng(seed);
    for (std::uint64_t k = 0; k < count; ++k) {
        const std::uint64_t pick = k + rng.next_below(total - k);
        std::swap(idx[k], idx[pick]);
        const double sign = rng.next_u64() & 1 ? 1.0 : -1.0;
        out.data()[idx[k]] = sign * magnitude;
    }
    return out;
}

}  // namespace kssc
