#ifndef DEEPHATE_TOOLS_COMMANDS_H_
#define DEEPHATE_TOOLS_COMMANDS_H_

#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "deephate/config.h"

namespace deephate::cli {

enum class ReportFormat { kTsv, kJson };

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::optional<int> threads;
  ReportFormat format = ReportFormat::kTsv;
  bool verbose = false;
};

// Per-invocation state: the resolved config, the dataset's artifact
// directory and the manifest being accumulated.
class Context {
 public:
  Context(std::string command, const GlobalOptions& options, bool config_required = true);

  const RunConfig& config() const { return config_; }
  const GlobalOptions& options() const { return options_; }
  bool has_config() const { return has_config_; }
  // <out>/<dataset>/
  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path artifact(const std::string& name) const { return dir_ / name; }

  // Returns the path after checking that it exists; otherwise names the
  // command that produces it.
  std::filesystem::path require(const std::string& name, const std::string& producer);

  void record_input(const std::filesystem::path& path);
  void record_output(const std::filesystem::path& path);
  nlohmann::json& extra() { return extra_; }

  // Writes <dir>/manifests/<command>.json.
  void finish();

 private:
  std::string command_;
  GlobalOptions options_;
  RunConfig config_;
  bool has_config_ = false;
  std::filesystem::path dir_;
  nlohmann::json inputs_ = nlohmann::json::object();
  nlohmann::json outputs_ = nlohmann::json::object();
  nlohmann::json extra_ = nlohmann::json::object();
  std::string started_at_;
};

int cmd_preprocess(Context& ctx);
int cmd_sentiment_label(Context& ctx);
int cmd_train_sentiment_embed(Context& ctx);
int cmd_fit_topics(Context& ctx, bool sweep);
int cmd_train(Context& ctx, const std::string& baseline);
int cmd_eval(Context& ctx);
int cmd_cross_validate(Context& ctx);
int cmd_ablate(Context& ctx);
int cmd_explain(Context& ctx, const std::string& post_id, const std::string& text);
int cmd_gradcheck(Context& ctx);
int cmd_stats(Context& ctx);

}  // namespace deephate::cli

#endif  // DEEPHATE_TOOLS_COMMANDS_H_
