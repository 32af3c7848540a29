#pragma once

#include <string>
#include <vector>

#include "starris/config.hpp"
#include "starris/ddpg.hpp"

namespace starris {

// CSV schema is fixed: this exact header, one row per episode, shortest
// round-trip decimal numbers, LF-terminated rows.
std::string metrics_csv_header();
std::string metrics_csv_row(const EpisodeMetrics& row);
std::string metrics_to_csv(const MetricsLog& log);

struct SummaryRow {
  std::string axis;
  double value = 0.0;
  double mean_ee = 0.0;  // over seeds
  double std_ee = 0.0;   // population standard deviation over seeds
};

std::string summary_to_csv(const std::vector<SummaryRow>& rows);

struct EvalReport {
  MetricsLog log;              // greedy rollouts, same per-episode schema as training
  double mean_final_ee = 0.0;  // EE at the last greedy step, averaged over episodes
  double mean_best_ee = 0.0;   // best EE within a rollout, averaged over episodes
};

/// Greedy rollouts: exploration off, no learning, fresh reset per episode.
EvalReport evaluate_policy(Environment& env, DdpgAgent& agent, int episodes, int steps);

// Mode drivers. Each writes its artifacts under cfg.out_dir (metrics.csv,
// checkpoint.json, summary.csv, config.json echo as applicable) and returns 0
// on completion; errors propagate as exceptions after partial CSV rows have
// been flushed.
int run_train(const RunConfig& cfg);
int run_eval(const RunConfig& cfg);
int run_baseline(const RunConfig& cfg);
int run_oracle(const RunConfig& cfg);
int run_sweep(const RunConfig& cfg);

}  // namespace starris
