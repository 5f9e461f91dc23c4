#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hcdir/types.hpp"

namespace hcdir {

// Two-domain generator configuration. Latents live on a shared unit sphere
// with cluster structure; users inherit part of their latent from their
// agent, target items are property bundles, and purchase probability follows
// sigmoid(z_u . v_i + quality * consulted - bias).
struct GenConfig {
  int users = 2000;
  int source_items = 300;
  int target_items = 42;
  int agents = 200;
  int properties = 35;
  int latent_dim = 8;
  int clusters = 5;

  double agent_effect = 0.6;     // latent share users inherit from their agent
  double property_effect = 0.5;  // concentration of property latents on cluster centers
  double new_customer_fraction = 0.15;

  double source_rate = 0.08;   // per-source-item interaction probability
  double target_rate = 0.048;  // expected per-item purchase probability (pre-boost)
  double latent_scale = 6.0;   // norm of z_u
  double source_sharpness = 4.0;
  double consult_rate = 1.5;    // Poisson mean multiplier on agent quality
  double quality_sigma = 1.0;   // lognormal sigma of agent quality
  double consult_boost = 0.9;   // kappa: quality coefficient for consulters
  double ncg_penalty = 2.0;     // logit penalty for new customers

  int months = 6;
  double feature_noise = 0.1;
  uint64_t seed = 1;

  std::vector<std::string> property_catalog = {
      "price", "assurance_level", "character", "coverage_time",
      "insurance_type", "age_restriction", "extra_features"};

  void validate() const;
};

// Writes the full dataset directory (all TSVs plus ground_truth.json).
// Byte-identical for identical configs.
void generate(const GenConfig& cfg, const std::filesystem::path& out_dir);

struct DescribeReport {
  std::array<int, kNumNodeTypes> node_counts{};
  std::array<int, kNumRelations> edge_counts{};
  int source_items = 0;
  int source_interactions = 0;
  int target_interactions = 0;
  int consults = 0;
  int overlap_users = 0;
  double target_sparsity = 0.0;
  double mean_source_seq = 0.0;
  double mean_target_seq = 0.0;
  std::vector<std::string> missing_files;

  std::string to_text() const;
  std::string to_json() const;
};

DescribeReport describe(const std::filesystem::path& dir);

}  // namespace hcdir
