#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <variant>

#include "dsekl/baselines.hpp"
#include "dsekl/data_io.hpp"
#include "dsekl/objective.hpp"

namespace dsekl {

inline constexpr const char* kModelHeader = "DSEKL-MODEL-v1";

/// A model restored from disk. Dual models keep only their support rows, so
/// prediction does not need the original training file.
struct SavedModel {
    std::variant<DualModel, RKSModel> model;
    std::optional<Standardizer> scaler;
    std::size_t n_train = 0;

    std::vector<double> decision_values(const Dataset& queries) const;
    std::vector<int> predict(const Dataset& queries) const;
};

/// Text format, one item per line:
///   DSEKL-MODEL-v1
///   kind dual | kind rks
///   n_train <N>
///   dim <D>
///   dual: kernel rbf <sigma> | kernel linear; support <M>; then M lines
///         "<j> <alpha_j> <idx>:<val> ..." (1-based feature indices)
///   rks:  sigma <s>; features <J>; J frequency rows; phases; weights
///   optional: scaler <D>; mean row; stddev row
///   end
void save_model(std::ostream& out, const DualModel& model, const Standardizer* scaler = nullptr);
void save_model(std::ostream& out, const RKSModel& model, std::size_t n_train, const Standardizer* scaler = nullptr);
SavedModel load_model(std::istream& in);

void save_model_file(const std::string& path, const SavedModel& model);
SavedModel load_model_file(const std::string& path);

}  // namespace dsekl
