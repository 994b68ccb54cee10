#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "sda/beamforming.hpp"
#include "sda/comet.hpp"
#include "sda/ppdu.hpp"
#include "sda/receiver.hpp"
#include "sda/sweep.hpp"

namespace sda {

/// Provenance embedded in every artifact.
struct ArtifactMeta {
  std::string subcommand;
  std::uint64_t seed = 0;
  nlohmann::json config = nlohmann::json::object();

  nlohmann::json to_json() const;
  /// Leading '#' lines for CSV artifacts.
  std::string csv_comment() const;
};

/// "<kind>-<seed>-<fnv1a64 of content>.<ext>"
std::string artifact_name(const std::string& kind, std::uint64_t seed, std::string_view content,
                          const std::string& extension);

/// Writes `content` under `dir` with a content-addressed name and returns the path.
std::filesystem::path write_artifact(const std::filesystem::path& dir, const std::string& kind, std::uint64_t seed,
                                     const std::string& content, const std::string& extension);

void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

std::string format_fixed(double value, int decimals);

std::string patterns_csv(const std::vector<int>& beam_indices, const std::vector<beam::Pattern>& patterns,
                         const ArtifactMeta& meta);
std::string codebook_csv(const beam::Codebook& codebook, const ArtifactMeta& meta);
nlohmann::json codebook_json(const beam::Codebook& codebook);

/// 21 x 21 grid, two decimals, header row of RX indices; rows are TX indices.
std::string snr_matrix_csv(const sweep::SnrMatrix& matrix, const ArtifactMeta& meta);
nlohmann::json sweep_result_json(const sweep::SweepResult& result, const ArtifactMeta& meta);

std::string gain_table_csv(const std::vector<comet::ElementResponse>& rows, const ArtifactMeta& meta);

nlohmann::json frame_json(const modem::Frame& frame);
nlohmann::json decode_report_json(const modem::DecodeReport& report);

nlohmann::json awv_json(const beam::Awv& awv);

}  // namespace sda
