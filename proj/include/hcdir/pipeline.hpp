#pragma once

#include <functional>
#include <unordered_set>

#include "hcdir/baselines.hpp"
#include "hcdir/cross_domain.hpp"
#include "hcdir/dataset.hpp"
#include "hcdir/source_model.hpp"
#include "hcdir/tahin.hpp"

namespace hcdir {

enum class ModelKind { Hcdir, Bpr, Gru4Rec, EmcdrBpr, EmcdrGru };
ModelKind model_from_name(const std::string& name);
const char* model_name(ModelKind kind);
bool is_cross_domain(ModelKind kind);

extern const std::vector<std::string> kDefaultMetaPaths;  // the ten configured paths

struct TrainConfig {
  int S = 32;
  int heads = 8;
  int gru_hidden = 32;
  int rounds = 1;  // TAHIN aggregation rounds (K)
  double lr = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int batch = 32;
  int max_epochs = 100;
  int patience = 5;
  int negatives = 4;
  uint64_t seed = 1;
  std::vector<std::string> meta_paths = kDefaultMetaPaths;
  AblationMode ablation = AblationMode::Full;
  bool squared_mapping_loss = false;

  void validate() const;
};

struct StageLog {
  std::string stage;
  std::vector<double> loss;
  std::vector<double> val_score;
  int best_epoch = -1;
  bool diverged = false;
};

struct TrainedModel {
  ModelKind kind = ModelKind::Hcdir;
  TrainConfig config;
  Split split;
  std::string data_hash;
  std::vector<std::string> dropped_paths;

  // hcdir
  TahinParams tahin;
  std::array<Eigen::MatrixXd, kNumNodeTypes> tables;  // encoder output on the training graph
  // shared by hcdir / emcdr-gru
  SourceEncoder source;
  // hcdir / emcdr mapping
  MapperParams mapper;
  // baselines
  BprModel target_mf, source_mf;
  Gru4RecModel gru4rec;

  std::vector<StageLog> log;

  // Target-domain item table used for cold-start scoring.
  const Eigen::MatrixXd& item_table() const;
  // Mapped target-space vector for a cold user (needs source history).
  Eigen::VectorXd map_cold_user(int user, const std::vector<int>& source_seq) const;
};

// Trains the requested model through its stages on the leakage-filtered
// artifacts derived from `split`. `shared_source` reuses a stage-2 encoder.
TrainedModel train_model(ModelKind kind, const Dataset& data, const Split& split,
                         const TrainConfig& cfg, const SourceEncoder* shared_source = nullptr);

struct EvalResult {
  double ndcg = 0, rec1 = 0, rec3 = 0, rec5 = 0;
  int evaluated_users = 0;
  int skipped_users = 0;
};

// Cold-start evaluation over `users`: rank all target items per user, score
// against their full target-domain interactions. Users without ground truth
// are skipped. When `rankings_out` is non-null, one (user, rank, item, score)
// row per ranked item is appended.
EvalResult evaluate_cold_start(const TrainedModel& model, const Dataset& data,
                               const std::vector<int>& users, std::string* rankings_out = nullptr);

std::string metrics_json_line(double eta, const std::string& model, const EvalResult& r,
                              uint64_t seed, double wall_sec);

// Checkpoint bundle: tensor archive + split + config in one directory.
void save_checkpoint(const TrainedModel& model, const std::filesystem::path& dir);
TrainedModel load_checkpoint(const std::filesystem::path& dir);

// Zero test-user target interactions in any training artifact.
bool audit_no_leakage(const Dataset& data, const Split& split, const HeteroGraph& training_graph,
                      const std::vector<Interaction>& training_interactions,
                      std::string* detail = nullptr);

// Mean NDCG of uniformly shuffled rankings, the empirical random baseline.
double random_ranking_ndcg(const Dataset& data, const std::vector<int>& users, int shuffles,
                           uint64_t seed);

}  // namespace hcdir
