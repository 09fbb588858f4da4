#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dsos {

// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return rows_ == 0; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<const double> data() const noexcept { return data_; }

    void append_row(std::span<const double> values) {
        if (rows_ == 0 && cols_ == 0) cols_ = values.size();
        if (values.size() != cols_) throw std::invalid_argument("Matrix::append_row: width mismatch");
        data_.insert(data_.end(), values.begin(), values.end());
        ++rows_;
    }

    Matrix select_rows(std::span<const std::size_t> idx) const {
        Matrix out(idx.size(), cols_);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            auto src = row(idx[i]);
            std::copy(src.begin(), src.end(), out.row(i).begin());
        }
        return out;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

enum class Origin : std::uint8_t { train = 0, test = 1 };

enum class LabelKind { categorical, numeric };

// Optional target column. Categorical labels are stored as class indices into
// `classes`; numeric labels use `values` directly and leave `classes` empty.
struct LabelColumn {
    LabelKind kind = LabelKind::numeric;
    std::vector<double> values;
    std::vector<std::string> classes;

    std::size_t n_classes() const noexcept { return classes.size(); }
};

// Paired train/test observations on a shared feature space.
struct Dataset {
    Matrix features;
    std::vector<Origin> origin;
    std::optional<LabelColumn> label;

    std::size_t n_rows() const noexcept { return features.rows(); }
    std::size_t n_features() const noexcept { return features.cols(); }

    std::size_t count(Origin o) const {
        std::size_t c = 0;
        for (auto v : origin)
            if (v == o) ++c;
        return c;
    }

    std::vector<std::size_t> indices_of(Origin o) const {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < origin.size(); ++i)
            if (origin[i] == o) idx.push_back(i);
        return idx;
    }

    Dataset select(std::span<const std::size_t> idx) const {
        Dataset out;
        out.features = features.select_rows(idx);
        out.origin.reserve(idx.size());
        for (auto i : idx) out.origin.push_back(origin[i]);
        if (label) {
            LabelColumn lc;
            lc.kind = label->kind;
            lc.classes = label->classes;
            lc.values.reserve(idx.size());
            for (auto i : idx) lc.values.push_back(label->values[i]);
            out.label = std::move(lc);
        }
        return out;
    }

    // Throws std::invalid_argument on any violated invariant.
    void validate() const {
        if (features.cols() < 1) throw std::invalid_argument("Dataset: needs at least one feature");
        if (origin.size() != features.rows())
            throw std::invalid_argument("Dataset: origin length != row count");
        if (count(Origin::train) == 0 || count(Origin::test) == 0)
            throw std::invalid_argument("Dataset: both train and test rows required");
        for (std::size_t r = 0; r < features.rows(); ++r)
            for (std::size_t c = 0; c < features.cols(); ++c)
                if (!std::isfinite(features(r, c)))
                    throw std::invalid_argument("Dataset: non-finite feature at row " +
                                                std::to_string(r) + ", column " + std::to_string(c));
        if (label) {
            if (label->values.size() != features.rows())
                throw std::invalid_argument("Dataset: label length != row count");
            if (label->kind == LabelKind::numeric)
                for (double v : label->values)
                    if (!std::isfinite(v)) throw std::invalid_argument("Dataset: non-finite label");
        }
    }

    static Dataset from_pair(Matrix train, const Matrix& test,
                             std::optional<LabelColumn> labels = std::nullopt) {
        if (train.cols() != test.cols())
            throw std::invalid_argument("Dataset::from_pair: feature width mismatch");
        Dataset out;
        const std::size_t n_tr = train.rows();
        out.features = std::move(train);
        for (std::size_t r = 0; r < test.rows(); ++r) out.features.append_row(test.row(r));
        out.origin.assign(n_tr, Origin::train);
        out.origin.insert(out.origin.end(), test.rows(), Origin::test);
        out.label = std::move(labels);
        return out;
    }
};

} // namespace dsos
