#include "amlt/matrix.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <random>

#include "amlt/errors.hpp"

namespace amlt {

bool MatrixBuffer::same_contents(const MatrixBuffer& other) const {
    if (rows_ != other.rows_ || cols_ != other.cols_) return false;
    for (std::int64_t r = 0; r < rows_; ++r)
        for (std::int64_t c = 0; c < cols_; ++c)
            if (at(r, c) != other.at(r, c)) return false;
    return true;
}

MatrixBuffer gen_matrix(std::uint64_t seed, std::int64_t rows, std::int64_t cols,
                        StorageOrder order, DataMode mode) {
    std::seed_seq seq{seed, static_cast<std::uint64_t>(rows), static_cast<std::uint64_t>(cols),
                      static_cast<std::uint64_t>(order), static_cast<std::uint64_t>(mode)};
    std::mt19937_64 rng(seq);
    MatrixBuffer m(rows, cols, order);
    double* p = m.data();
    size_t n = static_cast<size_t>(rows * cols);
    if (mode == DataMode::IntValued) {
        std::uniform_int_distribution<int> dist(-8, 8);
        for (size_t i = 0; i < n; ++i) p[i] = static_cast<double>(dist(rng));
    } else {
        std::uniform_real_distribution<double> dist(0.0, 1.0);
        for (size_t i = 0; i < n; ++i) p[i] = dist(rng);
    }
    return m;
}

namespace {

constexpr char kMagic[4] = {'A', 'M', 'L', 'T'};
constexpr size_t kHeaderSize = 24;

void put_u32(unsigned char* p, std::uint32_t v) {
    p[0] = static_cast<unsigned char>(v & 0xff);
    p[1] = static_cast<unsigned char>((v >> 8) & 0xff);
    p[2] = static_cast<unsigned char>((v >> 16) & 0xff);
    p[3] = static_cast<unsigned char>((v >> 24) & 0xff);
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

bool host_is_little_endian() {
    const std::uint32_t probe = 1;
    unsigned char b;
    std::memcpy(&b, &probe, 1);
    return b == 1;
}

}  // namespace

void write_matrix_file(const std::string& path, const MatrixBuffer& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw EngineError("cannot open '" + path + "' for writing");
    unsigned char header[kHeaderSize] = {0};
    std::memcpy(header, kMagic, 4);
    put_u32(header + 4, static_cast<std::uint32_t>(m.rows()));
    put_u32(header + 8, static_cast<std::uint32_t>(m.cols()));
    header[12] = static_cast<unsigned char>(m.order());
    out.write(reinterpret_cast<const char*>(header), kHeaderSize);

    // Stream values in storage order, byte-swapping on big-endian hosts.
    size_t n = static_cast<size_t>(m.rows() * m.cols());
    if (host_is_little_endian()) {
        out.write(reinterpret_cast<const char*>(m.data()),
                  static_cast<std::streamsize>(n * sizeof(double)));
    } else {
        for (size_t i = 0; i < n; ++i) {
            unsigned char bytes[8];
            std::memcpy(bytes, m.data() + i, 8);
            std::reverse(bytes, bytes + 8);
            out.write(reinterpret_cast<const char*>(bytes), 8);
        }
    }
    if (!out) throw EngineError("failed writing '" + path + "'");
}

MatrixBuffer read_matrix_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw EngineError("cannot open '" + path + "'");
    unsigned char header[kHeaderSize];
    in.read(reinterpret_cast<char*>(header), kHeaderSize);
    if (!in || std::memcmp(header, kMagic, 4) != 0)
        throw EngineError("'" + path + "' is not a matrix file (bad magic)");
    std::uint32_t rows = get_u32(header + 4);
    std::uint32_t cols = get_u32(header + 8);
    if (header[12] > 1) throw EngineError("'" + path + "' has an unknown storage order");
    StorageOrder order = static_cast<StorageOrder>(header[12]);
    MatrixBuffer m(rows, cols, order);
    size_t n = static_cast<size_t>(rows) * cols;
    in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw EngineError("'" + path + "' is truncated");
    if (!host_is_little_endian()) {
        for (size_t i = 0; i < n; ++i) {
            unsigned char bytes[8];
            std::memcpy(bytes, m.data() + i, 8);
            std::reverse(bytes, bytes + 8);
            std::memcpy(m.data() + i, bytes, 8);
        }
    }
    return m;
}

}  // namespace amlt
