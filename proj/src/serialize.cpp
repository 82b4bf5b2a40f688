#include "vclean/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "vclean/errors.hpp"
#include "vclean/format.hpp"

namespace vclean {

std::size_t CsvTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw DataError("csv table: no column named '" + name + "'");
}

bool CsvTable::has_column(const std::string& name) const {
    for (const auto& h : header) {
        if (h == name) return true;
    }
    return false;
}

std::string table_to_csv(const CsvTable& table) {
    std::string out;
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (i) out += ',';
        out += table.header[i];
    }
    out += '\n';
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            if (c) out += ',';
            out += format_double(table.columns[c][r]);
        }
        out += '\n';
    }
    return out;
}

CsvTable table_from_csv(const std::string& text) {
    CsvTable table;
    std::stringstream ss(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::stringstream ls(line);
        std::string field;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (table.header.empty()) {
            table.header = fields;
            table.columns.resize(fields.size());
            continue;
        }
        if (fields.size() != table.header.size()) {
            throw DataError("csv line " + std::to_string(line_no) + ": expected " +
                            std::to_string(table.header.size()) + " fields, got " +
                            std::to_string(fields.size()));
        }
        for (std::size_t c = 0; c < fields.size(); ++c) {
            try {
                table.columns[c].push_back(parse_double(fields[c]));
            } catch (const DataError&) {
                throw DataError("csv line " + std::to_string(line_no) + ": bad number '" +
                                fields[c] + "'");
            }
        }
    }
    if (table.header.empty()) throw DataError("csv: missing header");
    return table;
}

CsvTable signal_table(const Signal& clean, const Signal* noisy) {
    clean.validate();
    CsvTable table;
    table.header = {"t", "clean"};
    std::vector<double> t(clean.samples.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        t[i] = static_cast<double>(i) / clean.sample_rate;
    }
    table.columns.push_back(std::move(t));
    table.columns.push_back(clean.samples);
    if (noisy) {
        if (noisy->samples.size() != clean.samples.size()) {
            throw ShapeError("signal_table: clean and noisy lengths differ");
        }
        table.header.push_back("noisy");
        table.columns.push_back(noisy->samples);
    }
    return table;
}

CsvTable history_table(const std::vector<EpochStats>& history) {
    CsvTable table;
    table.header = {"epoch", "train_loss", "val_loss"};
    table.columns.resize(3);
    for (std::size_t i = 0; i < history.size(); ++i) {
        table.columns[0].push_back(static_cast<double>(i + 1));
        table.columns[1].push_back(history[i].train_loss);
        table.columns[2].push_back(history[i].val_loss);
    }
    return table;
}

// ---------------------------------------------------------------------------
// Binary encoding helpers.
// ---------------------------------------------------------------------------

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

void put_string(std::string& out, const std::string& s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out += s;
}

struct Reader {
    const std::string& bytes;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (pos + n > bytes.size()) throw DataError("binary payload truncated");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos + i]))
                 << (8 * i);
        }
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[pos + i]))
                 << (8 * i);
        }
        pos += 8;
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        const auto n = u32();
        need(n);
        std::string s = bytes.substr(pos, n);
        pos += n;
        return s;
    }
};

void append_checksum(std::string& bytes) { put_u64(bytes, fnv1a64(bytes)); }

// Splits payload from trailing checksum and verifies it.
std::string checked_payload(const std::string& bytes, const char* what) {
    if (bytes.size() < 8) throw DataError(std::string(what) + ": file too short");
    const std::string payload = bytes.substr(0, bytes.size() - 8);
    Reader tail{bytes, bytes.size() - 8};
    const std::uint64_t stored = tail.u64();
    if (fnv1a64(payload) != stored) {
        throw ChecksumError(std::string(what) + ": checksum mismatch");
    }
    return payload;
}

void expect_magic(Reader& r, const char (&magic)[4], const char* what) {
    r.need(4);
    if (std::memcmp(r.bytes.data() + r.pos, magic, 4) != 0) {
        throw DataError(std::string(what) + ": bad magic bytes");
    }
    r.pos += 4;
}

}  // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::string checkpoint_to_bytes(const TransformerParams& params, const ModelConfig& config) {
    std::string out;
    out.append(kCheckpointMagic, 4);
    put_u32(out, kFormatVersion);
    put_u32(out, static_cast<std::uint32_t>(config.seq_len));
    put_u32(out, static_cast<std::uint32_t>(config.d_model));
    put_u32(out, static_cast<std::uint32_t>(config.n_heads));
    put_u32(out, static_cast<std::uint32_t>(config.d_ff));
    put_u32(out, static_cast<std::uint32_t>(config.n_blocks));
    put_u32(out, config.positional == PositionalEncodingKind::Sinusoidal ? 1 : 0);
    put_f64(out, config.ln_eps);

    const auto refs = tensor_refs(params);
    put_u32(out, static_cast<std::uint32_t>(refs.size()));
    for (const auto& ref : refs) {
        put_string(out, ref.name);
        put_u32(out, static_cast<std::uint32_t>(ref.rows));
        put_u32(out, static_cast<std::uint32_t>(ref.cols));
        for (std::size_t i = 0; i < ref.size(); ++i) put_f64(out, ref.data[i]);
    }
    append_checksum(out);
    return out;
}

Checkpoint checkpoint_from_bytes(const std::string& bytes) {
    const std::string payload = checked_payload(bytes, "checkpoint");
    Reader r{payload};
    expect_magic(r, kCheckpointMagic, "checkpoint");
    const auto version = r.u32();
    if (version != kFormatVersion) {
        throw DataError("checkpoint: unsupported format version " + std::to_string(version));
    }
    Checkpoint cp;
    cp.config.seq_len = static_cast<int>(r.u32());
    cp.config.d_model = static_cast<int>(r.u32());
    cp.config.n_heads = static_cast<int>(r.u32());
    cp.config.d_ff = static_cast<int>(r.u32());
    cp.config.n_blocks = static_cast<int>(r.u32());
    cp.config.positional = r.u32() == 1 ? PositionalEncodingKind::Sinusoidal
                                        : PositionalEncodingKind::None;
    cp.config.ln_eps = r.f64();
    cp.config.validate();

    cp.params = zero_params(cp.config);
    const auto refs = tensor_refs(cp.params);
    const auto count = r.u32();
    if (count != refs.size()) {
        throw DataError("checkpoint: tensor count does not match the config");
    }
    for (const auto& ref : refs) {
        const std::string name = r.str();
        const auto rows = r.u32();
        const auto cols = r.u32();
        if (name != ref.name || rows != ref.rows || cols != ref.cols) {
            throw DataError("checkpoint: unexpected tensor '" + name + "' (wanted '" +
                            ref.name + "')");
        }
        for (std::size_t i = 0; i < ref.size(); ++i) ref.data[i] = r.f64();
    }
    if (r.pos != payload.size()) throw DataError("checkpoint: trailing bytes");
    return cp;
}

std::string dataset_to_bytes(const WindowedDataset& dataset) {
    std::string out;
    out.append(kDatasetMagic, 4);
    put_u32(out, kFormatVersion);
    put_u32(out, static_cast<std::uint32_t>(dataset.window_len));
    put_string(out, dataset.label);
    put_u32(out, static_cast<std::uint32_t>(dataset.pairs.size()));
    for (const auto& pair : dataset.pairs) {
        for (double v : pair.noisy) put_f64(out, v);
        for (double v : pair.clean) put_f64(out, v);
        put_f64(out, pair.stats.mean);
        put_f64(out, pair.stats.stddev);
    }
    append_checksum(out);
    return out;
}

WindowedDataset dataset_from_bytes(const std::string& bytes) {
    const std::string payload = checked_payload(bytes, "dataset");
    Reader r{payload};
    expect_magic(r, kDatasetMagic, "dataset");
    const auto version = r.u32();
    if (version != kFormatVersion) {
        throw DataError("dataset: unsupported format version " + std::to_string(version));
    }
    WindowedDataset ds;
    ds.window_len = static_cast<int>(r.u32());
    if (ds.window_len < 1) throw DataError("dataset: invalid window length");
    ds.label = r.str();
    const auto count = r.u32();
    ds.pairs.resize(count);
    const auto len = static_cast<std::size_t>(ds.window_len);
    for (auto& pair : ds.pairs) {
        pair.noisy.resize(len);
        pair.clean.resize(len);
        for (auto& v : pair.noisy) v = r.f64();
        for (auto& v : pair.clean) v = r.f64();
        pair.stats.mean = r.f64();
        pair.stats.stddev = r.f64();
    }
    if (r.pos != payload.size()) throw DataError("dataset: trailing bytes");
    return ds;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot open '" + tmp + "' for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw DataError("failed writing '" + tmp + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw DataError("cannot rename '" + tmp + "' to '" + path.string() + "'");
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

void save_checkpoint(const std::filesystem::path& path, const TransformerParams& params,
                     const ModelConfig& config) {
    write_file_atomic(path, checkpoint_to_bytes(params, config));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    return checkpoint_from_bytes(read_file(path));
}

void save_dataset(const std::filesystem::path& path, const WindowedDataset& dataset) {
    write_file_atomic(path, dataset_to_bytes(dataset));
}

WindowedDataset load_dataset(const std::filesystem::path& path) {
    return dataset_from_bytes(read_file(path));
}

}  // namespace vclean
