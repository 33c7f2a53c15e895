#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsekl/dataset.hpp"
#include "dsekl/rng.hpp"

namespace dsekl {

/// Malformed libsvm input; carries the 1-based line number.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

struct LibsvmOptions {
    /// Feature dimension; defaults to the largest index in the file.
    std::optional<std::size_t> dim;
    /// Raw label mapped to +1; the other label maps to -1. When unset the
    /// larger of the two distinct labels is +1.
    std::optional<double> positive_label;
};

/// Reads `<label> <idx>:<val> ...` lines with 1-based feature indices.
/// Blank lines and `#` comments are skipped. Binary labels only.
Dataset parse_libsvm(std::istream& in, const LibsvmOptions& options = {});
Dataset load_libsvm(const std::string& path, const LibsvmOptions& options = {});

/// Writes labels as +1/-1 and values with round-trip precision.
void write_libsvm(std::ostream& out, const Dataset& data);
void save_libsvm(const std::string& path, const Dataset& data);

struct XorOptions {
    double noise = 0.2;
    /// Read `noise` as a variance instead of a standard deviation.
    bool noise_is_variance = false;
};

/// Two-dimensional XOR problem: class +1 around [1,1] and [-1,-1], class -1
/// around [1,-1] and [-1,1], isotropic Gaussian noise. Labels alternate, so
/// the classes differ in size by at most one.
Dataset generate_xor(std::size_t n, Rng& rng, const XorOptions& options = {});

/// Disjoint random subsets with sizes round(fraction * N).
std::vector<Dataset> split(const Dataset& data, const std::vector<double>& fractions, Rng& rng);

/// Disjoint random subsets with explicit sizes.
std::vector<Dataset> split_sizes(const Dataset& data, const std::vector<std::size_t>& sizes, Rng& rng);

/// Random subsample of min(size, N) rows.
Dataset subsample(const Dataset& data, std::size_t size, Rng& rng);

struct Standardizer {
    std::vector<double> mean;
    std::vector<double> stddev;  ///< 0 marks a constant feature (centered only)

    static Standardizer fit(const Dataset& train);
    Dataset apply(const Dataset& data) const;
};

struct StandardizedSets {
    Dataset train;
    std::vector<Dataset> others;
    Standardizer stats;
};

/// Zero mean / unit variance from `train` only, applied to all sets.
StandardizedSets standardize(const Dataset& train, const std::vector<Dataset>& others);

}  // namespace dsekl
