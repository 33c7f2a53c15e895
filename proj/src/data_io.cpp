#include "dsekl/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <istream>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string_view>

namespace dsekl {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

bool parse_double(std::string_view token, double& out) {
    if (token.empty()) return false;
    if (token.front() == '+') token.remove_prefix(1);
    const auto* end = token.data() + token.size();
    const auto res = std::from_chars(token.data(), end, out);
    return res.ec == std::errc() && res.ptr == end && std::isfinite(out);
}

bool parse_index(std::string_view token, unsigned long long& out) {
    if (token.empty()) return false;
    const auto* end = token.data() + token.size();
    const auto res = std::from_chars(token.data(), end, out);
    return res.ec == std::errc() && res.ptr == end;
}

struct RawRow {
    double label;
    std::vector<std::pair<FeatureIndex, double>> entries;
};

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

Dataset parse_libsvm(std::istream& in, const LibsvmOptions& options) {
    std::vector<RawRow> rows;
    std::set<double> labels;
    std::string line;
    std::size_t line_no = 0;
    std::size_t max_index = 0;

    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view(line);
        if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = trim(view);
        if (view.empty()) continue;

        RawRow row{};
        std::size_t pos = 0;
        bool first = true;
        while (pos < view.size()) {
            const auto next = view.find_first_of(" \t", pos);
            const auto token = view.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
            pos = next == std::string_view::npos ? view.size() : view.find_first_not_of(" \t", next);
            if (pos == std::string_view::npos) pos = view.size();

            if (first) {
                if (!parse_double(token, row.label)) {
                    throw ParseError(line_no, "non-numeric label '" + std::string(token) + "'");
                }
                first = false;
                continue;
            }
            const auto colon = token.find(':');
            if (colon == std::string_view::npos) {
                throw ParseError(line_no, "expected <index>:<value>, got '" + std::string(token) + "'");
            }
            unsigned long long idx = 0;
            double val = 0.0;
            if (!parse_index(token.substr(0, colon), idx) || idx == 0 ||
                idx > std::numeric_limits<FeatureIndex>::max()) {
                throw ParseError(line_no, "invalid feature index in '" + std::string(token) + "'");
            }
            if (!parse_double(token.substr(colon + 1), val)) {
                throw ParseError(line_no, "non-numeric feature value in '" + std::string(token) + "'");
            }
            const auto zero_based = static_cast<FeatureIndex>(idx - 1);
            if (!row.entries.empty() && zero_based <= row.entries.back().first) {
                throw ParseError(line_no, "feature indices must be strictly increasing (" + std::to_string(idx) +
                                              " after " + std::to_string(row.entries.back().first + 1) + ")");
            }
            row.entries.emplace_back(zero_based, val);
            max_index = std::max<std::size_t>(max_index, idx);
        }
        labels.insert(row.label);
        if (labels.size() > 2) {
            std::ostringstream msg;
            msg << "more than two distinct labels (";
            for (const double l : labels) msg << ' ' << l;
            msg << " ); only binary classification is supported";
            throw ParseError(line_no, msg.str());
        }
        rows.push_back(std::move(row));
    }

    std::size_t dim = max_index;
    if (options.dim) {
        if (*options.dim < max_index) {
            throw std::invalid_argument("feature index " + std::to_string(max_index) + " exceeds requested dimension " +
                                        std::to_string(*options.dim));
        }
        dim = *options.dim;
    }

    double positive;
    if (options.positive_label) {
        positive = *options.positive_label;
    } else if (labels.size() == 1 && *labels.begin() <= 0.0) {
        // Single non-positive label: every row is negative.
        positive = std::numeric_limits<double>::quiet_NaN();
    } else {
        positive = labels.empty() ? 1.0 : *labels.rbegin();
    }

    Dataset data(dim);
    for (const auto& row : rows) data.add_row(row.entries, row.label == positive ? 1 : -1);
    data.set_n_features(dim);
    return data;
}

Dataset load_libsvm(const std::string& path, const LibsvmOptions& options) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file '" + path + "'");
    return parse_libsvm(in, options);
}

void write_libsvm(std::ostream& out, const Dataset& data) {
    std::string line;
    for (std::size_t i = 0; i < data.size(); ++i) {
        line = data.label(i) > 0 ? "+1" : "-1";
        const auto r = data.row(i);
        for (std::size_t k = 0; k < r.nnz(); ++k) {
            line += ' ';
            line += std::to_string(std::size_t{r.indices[k]} + 1);
            line += ':';
            line += format_double(r.values[k]);
        }
        line += '\n';
        out << line;
    }
}

void save_libsvm(const std::string& path, const Dataset& data) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write dataset file '" + path + "'");
    write_libsvm(out, data);
}

Dataset generate_xor(std::size_t n, Rng& rng, const XorOptions& options) {
    const double stddev = options.noise_is_variance ? std::sqrt(options.noise) : options.noise;
    std::normal_distribution<double> noise(0.0, stddev);
    std::bernoulli_distribution coin(0.5);
    Dataset data(2);
    for (std::size_t i = 0; i < n; ++i) {
        const int label = i % 2 == 0 ? 1 : -1;
        const double cx = coin(rng) ? 1.0 : -1.0;
        // +1 centers have equal coordinate signs, -1 centers opposite ones.
        const double cy = label > 0 ? cx : -cx;
        const double x[2] = {cx + noise(rng), cy + noise(rng)};
        data.add_dense_row(x, label);
    }
    data.set_n_features(2);
    return data;
}

std::vector<Dataset> split_sizes(const Dataset& data, const std::vector<std::size_t>& sizes, Rng& rng) {
    std::size_t total = 0;
    for (const auto s : sizes) total += s;
    if (total > data.size()) {
        throw std::invalid_argument("split sizes sum to " + std::to_string(total) + " but the dataset has " +
                                    std::to_string(data.size()) + " rows");
    }
    const std::vector<Index> perm = sample_indices(data.size(), total, rng);
    std::vector<Dataset> out;
    std::size_t offset = 0;
    for (const auto s : sizes) {
        out.push_back(data.subset(std::span<const Index>(perm).subspan(offset, s)));
        offset += s;
    }
    return out;
}

std::vector<Dataset> split(const Dataset& data, const std::vector<double>& fractions, Rng& rng) {
    double sum = 0.0;
    for (const double f : fractions) {
        if (!(f > 0.0)) throw std::invalid_argument("split fractions must be positive");
        sum += f;
    }
    if (sum > 1.0 + 1e-12) throw std::invalid_argument("split fractions sum to " + std::to_string(sum) + " > 1");
    std::vector<std::size_t> sizes;
    std::size_t used = 0;
    for (const double f : fractions) {
        auto s = static_cast<std::size_t>(std::llround(f * static_cast<double>(data.size())));
        s = std::min(s, data.size() - used);
        used += s;
        sizes.push_back(s);
    }
    return split_sizes(data, sizes, rng);
}

Dataset subsample(const Dataset& data, std::size_t size, Rng& rng) {
    const auto idx = sample_indices(data.size(), std::min(size, data.size()), rng);
    return data.subset(idx);
}

Standardizer Standardizer::fit(const Dataset& train) {
    if (train.empty()) throw std::invalid_argument("cannot standardize on an empty training set");
    const std::size_t d = train.n_features();
    Standardizer s;
    s.mean.assign(d, 0.0);
    s.stddev.assign(d, 0.0);
    const double n = static_cast<double>(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
        const auto r = train.row(i);
        for (std::size_t k = 0; k < r.nnz(); ++k) s.mean[r.indices[k]] += r.values[k];
    }
    for (auto& m : s.mean) m /= n;
    // Second pass over deviations; implicit zeros contribute mean^2 each.
    std::vector<double> nnz_count(d, 0.0);
    for (std::size_t i = 0; i < train.size(); ++i) {
        const auto r = train.row(i);
        for (std::size_t k = 0; k < r.nnz(); ++k) {
            const double dev = r.values[k] - s.mean[r.indices[k]];
            s.stddev[r.indices[k]] += dev * dev;
            nnz_count[r.indices[k]] += 1.0;
        }
    }
    for (std::size_t f = 0; f < d; ++f) {
        const double var = (s.stddev[f] + (n - nnz_count[f]) * s.mean[f] * s.mean[f]) / n;
        const double sd = std::sqrt(var);
        s.stddev[f] = sd > 1e-12 * (1.0 + std::abs(s.mean[f])) ? sd : 0.0;
    }
    return s;
}

Dataset Standardizer::apply(const Dataset& data) const {
    const std::size_t d = mean.size();
    if (data.n_features() > d) {
        throw std::invalid_argument("dataset has " + std::to_string(data.n_features()) +
                                    " features, standardizer was fit on " + std::to_string(d));
    }
    Dataset out(d);
    std::vector<double> dense(d);
    for (std::size_t i = 0; i < data.size(); ++i) {
        std::fill(dense.begin(), dense.end(), 0.0);
        const auto r = data.row(i);
        for (std::size_t k = 0; k < r.nnz(); ++k) dense[r.indices[k]] = r.values[k];
        for (std::size_t f = 0; f < d; ++f) {
            dense[f] -= mean[f];
            if (stddev[f] > 0.0) dense[f] /= stddev[f];
        }
        out.add_dense_row(dense, data.label(i));
    }
    out.set_n_features(d);
    return out;
}

StandardizedSets standardize(const Dataset& train, const std::vector<Dataset>& others) {
    StandardizedSets out;
    out.stats = Standardizer::fit(train);
    out.train = out.stats.apply(train);
    for (const auto& o : others) out.others.push_back(out.stats.apply(o));
    return out;
}

}  // namespace dsekl
