#pragma once

// Two-stage PPCA over a statistic vector: one model per group C1..C10,
// latents concatenated into an intermediate vector, then a final model that
// yields the d-dimensional texture code.

#include <cstdint>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "texlat/ppca.hpp"
#include "texlat/pss.hpp"

namespace texlat {

inline constexpr std::uint32_t kModelFormatVersion = 1;

/// Largest eigenvalue at or below which a group counts as constant.
inline constexpr double kGroupVarianceFloor = 1e-12;

class HppcaModel {
public:
    HppcaModel(PssParams params, double threshold, std::vector<PpcaModel> groups, PpcaModel final_model);

    const PssParams& params() const { return params_; }
    double threshold() const { return threshold_; }
    const std::vector<PpcaModel>& group_models() const { return groups_; }
    const PpcaModel& final_model() const { return final_; }

    std::size_t input_dim() const { return layout_.dim(); }
    std::size_t intermediate_dim() const { return final_.input_dim(); }
    std::size_t output_dim() const { return final_.latent_dim(); }
    std::vector<std::size_t> group_dims() const;

    /// Group stage only: concatenated group latents.
    Eigen::VectorXd intermediate(const PssVector& v) const;
    Eigen::VectorXd encode(const PssVector& v) const;
    PssVector decode(const Eigen::VectorXd& code) const;
    PssVector decode_intermediate(const Eigen::VectorXd& latents) const;

    double reduction_rate() const;

private:
    PssParams params_;
    double threshold_;
    std::vector<PpcaModel> groups_;
    PpcaModel final_;
    PssLayout layout_;
};

/// Result of the group stage, reusable across several output dimensions.
struct GroupStage {
    PssParams params;
    double threshold = 0.0;
    std::vector<PpcaModel> groups;
    Eigen::MatrixXd latents;  // n x intermediate_dim
};

/// Stacks vectors as rows; all must share one layout.
Eigen::MatrixXd stack_vectors(std::span<const PssVector> data);

GroupStage fit_groups(std::span<const PssVector> data, double threshold, std::size_t jobs = 1);
HppcaModel fit_final(const GroupStage& stage, std::size_t output_dim);
HppcaModel fit_hierarchy(std::span<const PssVector> data, double threshold, std::size_t output_dim,
                         std::size_t jobs = 1);

/// 1 - d / D.
double reduction_rate(std::size_t input_dim, std::size_t output_dim);

void save_model(const HppcaModel& model, std::ostream& out);
void save_model(const HppcaModel& model, const std::filesystem::path& path);
HppcaModel load_model(std::istream& in);
HppcaModel load_model(const std::filesystem::path& path);

/// CSV with header stage,index,eigenvalue,ccr; stages C1..C10 then "final".
void write_spectra_csv(const HppcaModel& model, std::ostream& out);

} // namespace texlat
