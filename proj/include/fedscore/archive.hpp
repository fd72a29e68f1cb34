#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fedscore/fedsim.hpp"

namespace fedscore {

/// On-disk record of one federation run:
///
///   config.json     federation config snapshot (includes MLP shape and utility)
///   test.csv        evaluation set
///   round_NNNN.bin  one per round, little-endian:
///                     u64 round, u64 n_clients, then n_clients + 2 models
///                     (m0, U_0 .. U_{N-1}, m), each as u64 dim + dim x f64
///   manifest.json   file list with SHA-256 checksums
struct TranscriptArchive {
  FederationConfig config;
  LabeledDataset test;
  std::vector<RoundTranscript> transcripts;

  ModelEvaluator evaluator() const;
};

std::string config_to_json(const FederationConfig& config);
FederationConfig config_from_json(const std::string& text);

std::string encode_transcript(const RoundTranscript& t);
RoundTranscript decode_transcript(std::string_view bytes);

void write_transcript_archive(const std::filesystem::path& dir, const TranscriptArchive& archive);
/// Verifies every checksum in the manifest before decoding.
TranscriptArchive read_transcript_archive(const std::filesystem::path& dir);

}  // namespace fedscore
