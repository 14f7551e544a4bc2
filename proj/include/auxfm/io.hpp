#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "auxfm/datasets.hpp"
#include "auxfm/model.hpp"
#include "auxfm/sample.hpp"
#include "auxfm/train.hpp"

namespace auxfm {

// ---------------------------------------------------------------------------
// Checkpoints.
//
// Little-endian layout:
//   "AXFM" | u32 version | u32 kind | u32 n | n x u32 layer_dims | u32 activation
//   | u64 count | count x f64 params | u64 FNV-1a of every preceding byte

inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class ModelKind : std::uint32_t { velocity = 0, prototype = 1 };

struct Checkpoint {
    ModelKind kind = ModelKind::velocity;
    Mlp net;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
/// Verifies magic, checksum and version, in that order.
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const VelocityModel& model, const std::filesystem::path& path);
void save_checkpoint(const PrototypeModel& model, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);
/// `dim` is the data dimension; it fixes how many trailing inputs are class codes.
VelocityModel load_velocity(const std::filesystem::path& path, std::size_t dim = 2);
PrototypeModel load_prototype(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Run configuration: `key = value` lines, `#` comments.

struct DatasetSpec {
    std::string kind = "ring";  // ring | bimodal | point
    std::size_t num_modes = 8;
    std::size_t n_per_mode = 200;
    double jitter = 0.02;
    std::uint64_t seed = 0;
    double separation = 2.0;  // bimodal
    std::size_t n = 2000;     // bimodal
    std::vector<double> point{1.0, 1.0};

    LabeledDataset build() const;
};

struct RunConfig {
    TrainConfig train;  // train.dataset is filled from `dataset` by build_dataset()
    SampleConfig sample;
    DatasetSpec dataset;
    /// Keys that were not given and fell back to their defaults.
    std::vector<std::string> defaulted;

    /// Materializes the dataset into train.dataset.
    void build_dataset();
};

/// Every accepted key, in documentation order.
const std::vector<std::string>& config_keys();

RunConfig parse_config(std::string_view text, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// CSV artifacts.

struct LabeledSamples {
    Tensor points;
    std::vector<int> labels;  // kNullLabel when unlabeled
};

/// sample_id,label,x_0..x_{d-1}
void write_samples_csv(const std::filesystem::path& path, const Tensor& samples, std::span<const int> labels);
LabeledSamples read_samples_csv(const std::filesystem::path& path);

/// step,loss
void write_loss_csv(const std::filesystem::path& path, std::span<const double> loss);
/// label,x,y (label,x_0.. for d != 2)
void write_dataset_csv(const std::filesystem::path& path, const LabeledDataset& ds);

struct MetricRow {
    std::string name;
    double value = 0.0;
};
/// metric,value
void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricRow> rows);

struct CheckRow {
    std::string check;
    double value = 0.0;
    double threshold = 0.0;
    bool pass = false;
};
/// check,value,threshold,pass
void write_check_csv(const std::filesystem::path& path, std::span<const CheckRow> rows);

void write_text_file(const std::filesystem::path& path, std::string_view text);
std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path);

}  // namespace auxfm
