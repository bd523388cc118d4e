#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

namespace amlt {

enum class StorageOrder : std::uint8_t { RowMajor = 0, ColMajor = 1 };

// Dense f64 matrix with explicit leading stride. 1-D arrays use cols == 1 and
// index with at(i, 0).
class MatrixBuffer {
public:
    MatrixBuffer() = default;
    MatrixBuffer(std::int64_t rows, std::int64_t cols,
                 StorageOrder order = StorageOrder::RowMajor)
        : rows_(rows), cols_(cols), order_(order),
          stride_(order == StorageOrder::RowMajor ? cols : rows),
          data_(static_cast<size_t>(rows * cols), 0.0) {}

    std::int64_t rows() const { return rows_; }
    std::int64_t cols() const { return cols_; }
    StorageOrder order() const { return order_; }
    std::int64_t stride() const { return stride_; }

    double& at(std::int64_t r, std::int64_t c) {
        return data_[static_cast<size_t>(index(r, c))];
    }
    double at(std::int64_t r, std::int64_t c) const {
        return data_[static_cast<size_t>(index(r, c))];
    }

    // Pointer/stride pair for walking a row (dc) or a column (dr): the element
    // step along the requested direction in the underlying array.
    const double* data() const { return data_.data(); }
    double* data() { return data_.data(); }
    std::int64_t index(std::int64_t r, std::int64_t c) const {
        return order_ == StorageOrder::RowMajor ? r * stride_ + c : c * stride_ + r;
    }
    std::int64_t step_along_cols() const {
        return order_ == StorageOrder::RowMajor ? 1 : stride_;
    }
    std::int64_t step_along_rows() const {
        return order_ == StorageOrder::RowMajor ? stride_ : 1;
    }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    bool same_contents(const MatrixBuffer& other) const;

private:
    std::int64_t rows_ = 0;
    std::int64_t cols_ = 0;
    StorageOrder order_ = StorageOrder::RowMajor;
    std::int64_t stride_ = 0;
    std::vector<double> data_;
};

enum class DataMode { IntValued, Real };

// Deterministic matrix generation: the same (seed, rows, cols, order, mode)
// always produces the same buffer. IntValued draws integers in [-8, 8] stored
// as doubles, so tiled and naive accumulation orders agree bit for bit; Real
// draws uniformly from [0, 1).
MatrixBuffer gen_matrix(std::uint64_t seed, std::int64_t rows, std::int64_t cols,
                        StorageOrder order, DataMode mode);

// Binary matrix file: 24-byte header (magic "AMLT", u32 rows, u32 cols,
// u8 storage order, zero padding), then rows*cols little-endian f64 values in
// storage order.
void write_matrix_file(const std::string& path, const MatrixBuffer& m);
MatrixBuffer read_matrix_file(const std::string& path);

}  // namespace amlt
