#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vclean/signal.hpp"
#include "vclean/training.hpp"
#include "vclean/transformer.hpp"

namespace vclean {

// Columnar numeric table with a header row; the CSV carrier for signals,
// denoised traces and loss histories. Numbers are written in shortest
// round-trip form.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;

    std::size_t row_count() const { return columns.empty() ? 0 : columns[0].size(); }
    std::size_t column_index(const std::string& name) const;  // throws DataError
    bool has_column(const std::string& name) const;
};

std::string table_to_csv(const CsvTable& table);
CsvTable table_from_csv(const std::string& text);

// Signal CSV: header `t,clean[,noisy]`, t = i / sample_rate.
CsvTable signal_table(const Signal& clean, const Signal* noisy);

// History CSV: header `epoch,train_loss,val_loss`, epochs 1-based.
CsvTable history_table(const std::vector<EpochStats>& history);

// ---------------------------------------------------------------------------
// Binary formats. Both carry magic bytes, a version, little-endian IEEE-754
// payloads and a trailing FNV-1a 64 checksum over all preceding bytes.
// ---------------------------------------------------------------------------

inline constexpr char kCheckpointMagic[4] = {'V', 'C', 'L', 'N'};
inline constexpr char kDatasetMagic[4] = {'V', 'C', 'D', 'S'};
inline constexpr std::uint32_t kFormatVersion = 1;

std::uint64_t fnv1a64(const std::string& bytes);

// Checkpoint layout: magic, version, ModelConfig record (seq_len, d_model,
// n_heads, d_ff, n_blocks, positional, ln_eps), tensor count, then each
// tensor as (name, rows, cols, payload) in tensor_refs order, checksum.
std::string checkpoint_to_bytes(const TransformerParams& params, const ModelConfig& config);

struct Checkpoint {
    ModelConfig config;
    TransformerParams params;
};

Checkpoint checkpoint_from_bytes(const std::string& bytes);

// Dataset layout: magic, version, window_len, label, pair count, then per
// pair (noisy, clean, mean, stddev), checksum.
std::string dataset_to_bytes(const WindowedDataset& dataset);
WindowedDataset dataset_from_bytes(const std::string& bytes);

// Whole-file helpers. Writes go to a temp file in the same directory and are
// renamed into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

void save_checkpoint(const std::filesystem::path& path, const TransformerParams& params,
                     const ModelConfig& config);
Checkpoint load_checkpoint(const std::filesystem::path& path);
void save_dataset(const std::filesystem::path& path, const WindowedDataset& dataset);
WindowedDataset load_dataset(const std::filesystem::path& path);

}  // namespace vclean
