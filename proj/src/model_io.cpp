#include "dsekl/model_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace dsekl {

namespace {

std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

[[noreturn]] void bad_model(const std::string& what) { throw std::runtime_error("malformed model file: " + what); }

std::string next_line(std::istream& in, const char* expecting) {
    std::string line;
    if (!std::getline(in, line)) bad_model(std::string("unexpected end of file, expected ") + expecting);
    return line;
}

/// Reads "<key> <value...>" and returns the value part.
std::istringstream keyed(std::istream& in, const std::string& key) {
    const std::string line = next_line(in, key.c_str());
    std::istringstream ss(line);
    std::string k;
    ss >> k;
    if (k != key) bad_model("expected '" + key + "', got '" + line + "'");
    return ss;
}

std::vector<double> read_row(std::istream& in, std::size_t count, const char* what) {
    std::istringstream ss(next_line(in, what));
    std::vector<double> out(count);
    for (auto& v : out) {
        if (!(ss >> v)) bad_model(std::string("short row for ") + what);
    }
    return out;
}

void write_row(std::ostream& out, const double* values, std::size_t count) {
    std::string line;
    for (std::size_t k = 0; k < count; ++k) {
        if (k) line += ' ';
        line += fmt(values[k]);
    }
    line += '\n';
    out << line;
}

void write_scaler(std::ostream& out, const Standardizer* scaler) {
    if (!scaler) return;
    out << "scaler " << scaler->mean.size() << '\n';
    write_row(out, scaler->mean.data(), scaler->mean.size());
    write_row(out, scaler->stddev.data(), scaler->stddev.size());
}

}  // namespace

void save_model(std::ostream& out, const DualModel& model, const Standardizer* scaler) {
    if (!model.expansion) throw std::invalid_argument("cannot save a model without expansion data");
    const Dataset& data = *model.expansion;
    const auto support = model.support();
    out << kModelHeader << '\n';
    out << "kind dual\n";
    out << "n_train " << model.size() << '\n';
    out << "dim " << data.n_features() << '\n';
    out << "kernel " << (model.spec.family == KernelFamily::Linear ? std::string("linear") : "rbf " + fmt(model.spec.sigma))
        << '\n';
    out << "support " << support.size() << '\n';
    std::string line;
    for (const Index j : support) {
        line = std::to_string(j) + ' ' + fmt(model.alpha[j]);
        const auto r = data.row(j);
        for (std::size_t k = 0; k < r.nnz(); ++k) {
            line += ' ' + std::to_string(std::size_t{r.indices[k]} + 1) + ':' + fmt(r.values[k]);
        }
        line += '\n';
        out << line;
    }
    write_scaler(out, scaler);
    out << "end\n";
}

void save_model(std::ostream& out, const RKSModel& model, std::size_t n_train, const Standardizer* scaler) {
    const auto& map = model.map;
    out << kModelHeader << '\n';
    out << "kind rks\n";
    out << "n_train " << n_train << '\n';
    out << "dim " << map.input_dim() << '\n';
    out << "sigma " << fmt(map.sigma) << '\n';
    out << "features " << map.n_features() << '\n';
    std::vector<double> row(map.input_dim());
    for (Eigen::Index r = 0; r < map.frequencies.rows(); ++r) {
        for (Eigen::Index c = 0; c < map.frequencies.cols(); ++c) row[static_cast<std::size_t>(c)] = map.frequencies(r, c);
        write_row(out, row.data(), row.size());
    }
    write_row(out, map.phases.data(), map.n_features());
    write_row(out, model.linear.weights.data(), static_cast<std::size_t>(model.linear.weights.size()));
    write_scaler(out, scaler);
    out << "end\n";
}

SavedModel load_model(std::istream& in) {
    if (next_line(in, "header") != kModelHeader) bad_model(std::string("missing ") + kModelHeader + " header");
    std::string kind;
    keyed(in, "kind") >> kind;
    SavedModel saved;
    std::size_t dim = 0;
    if (!(keyed(in, "n_train") >> saved.n_train)) bad_model("bad n_train");
    if (!(keyed(in, "dim") >> dim)) bad_model("bad dim");

    if (kind == "dual") {
        std::string family;
        double sigma = 1.0;
        auto ks = keyed(in, "kernel");
        ks >> family;
        if (family == "rbf" && !(ks >> sigma)) bad_model("rbf kernel without sigma");
        const KernelSpec spec = parse_kernel_spec(family, sigma);
        std::size_t m = 0;
        if (!(keyed(in, "support") >> m)) bad_model("bad support count");

        auto rows = std::make_shared<Dataset>(dim);
        std::vector<double> alpha;
        std::vector<std::pair<FeatureIndex, double>> entries;
        for (std::size_t s = 0; s < m; ++s) {
            std::istringstream ss(next_line(in, "support row"));
            std::size_t j = 0;
            double a = 0.0;
            if (!(ss >> j >> a)) bad_model("bad support row " + std::to_string(s));
            entries.clear();
            std::string tok;
            while (ss >> tok) {
                const auto colon = tok.find(':');
                if (colon == std::string::npos) bad_model("bad feature '" + tok + "'");
                entries.emplace_back(static_cast<FeatureIndex>(std::stoul(tok.substr(0, colon)) - 1),
                                     std::stod(tok.substr(colon + 1)));
            }
            // Labels are not needed for prediction; +1 is a placeholder.
            rows->add_row(entries, 1);
            alpha.push_back(a);
        }
        rows->set_n_features(dim);
        DualModel model(std::move(rows), spec);
        model.alpha = std::move(alpha);
        saved.model = std::move(model);
    } else if (kind == "rks") {
        RKSModel model;
        double sigma = 0.0;
        std::size_t features = 0;
        if (!(keyed(in, "sigma") >> sigma)) bad_model("bad sigma");
        if (!(keyed(in, "features") >> features)) bad_model("bad feature count");
        model.map.sigma = sigma;
        model.map.scale = std::sqrt(2.0 / static_cast<double>(features));
        model.map.frequencies.resize(static_cast<Eigen::Index>(features), static_cast<Eigen::Index>(dim));
        for (std::size_t r = 0; r < features; ++r) {
            const auto row = read_row(in, dim, "frequencies");
            for (std::size_t c = 0; c < dim; ++c) {
                model.map.frequencies(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
            }
        }
        const auto phases = read_row(in, features, "phases");
        const auto weights = read_row(in, features, "weights");
        model.map.phases = Eigen::Map<const Eigen::VectorXd>(phases.data(), static_cast<Eigen::Index>(features));
        model.linear.weights = Eigen::Map<const Eigen::VectorXd>(weights.data(), static_cast<Eigen::Index>(features));
        saved.model = std::move(model);
    } else {
        bad_model("unknown model kind '" + kind + "'");
    }

    std::string line = next_line(in, "end");
    if (line.rfind("scaler", 0) == 0) {
        std::size_t d = 0;
        std::istringstream(line.substr(6)) >> d;
        Standardizer s;
        s.mean = read_row(in, d, "scaler mean");
        s.stddev = read_row(in, d, "scaler stddev");
        saved.scaler = std::move(s);
        line = next_line(in, "end");
    }
    if (line != "end") bad_model("expected 'end', got '" + line + "'");
    return saved;
}

std::vector<double> SavedModel::decision_values(const Dataset& queries) const {
    const Dataset input = scaler ? scaler->apply(queries) : queries;
    if (const auto* dual = std::get_if<DualModel>(&model)) return dsekl::decision_values(*dual, input);
    return std::get<RKSModel>(model).decision_values(input);
}

std::vector<int> SavedModel::predict(const Dataset& queries) const {
    const auto f = decision_values(queries);
    std::vector<int> out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = sign_label(f[i]);
    return out;
}

void save_model_file(const std::string& path, const SavedModel& model) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write model file '" + path + "'");
    const Standardizer* scaler = model.scaler ? &*model.scaler : nullptr;
    if (const auto* dual = std::get_if<DualModel>(&model.model)) {
        save_model(out, *dual, scaler);
    } else {
        save_model(out, std::get<RKSModel>(model.model), model.n_train, scaler);
    }
}

SavedModel load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file '" + path + "'");
    return load_model(in);
}

}  // namespace dsekl
