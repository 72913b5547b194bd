#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace hycharge {

// Dense row-major matrix, just enough for the assignment/dispatch matrices.
template <typename T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    T row_sum(std::size_t r) const {
        T s{};
        for (std::size_t c = 0; c < cols_; ++c) s += (*this)(r, c);
        return s;
    }
    T col_sum(std::size_t c) const {
        T s{};
        for (std::size_t r = 0; r < rows_; ++r) s += (*this)(r, c);
        return s;
    }

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

} // namespace hycharge
