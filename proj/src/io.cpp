#include "darkchain/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "darkchain/errors.hpp"

namespace fs = std::filesystem;

namespace darkchain {

void Table::add(std::vector<Cell> row) {
    if (row.size() != columns.size())
        throw InvalidParameter("table row has " + std::to_string(row.size()) + " cells, expected " +
                               std::to_string(columns.size()));
    rows.push_back(std::move(row));
}

int Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return static_cast<int>(i);
    return -1;
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string to_csv(const Table& t) {
    std::ostringstream os;
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << csv_escape(t.columns[i]);
    os << "\r\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) os << ',';
            if (const auto* s = std::get_if<std::string>(&row[i])) os << csv_escape(*s);
            else if (const auto* d = std::get_if<double>(&row[i])) os << format_number(*d);
            else os << std::get<std::int64_t>(row[i]);
        }
        os << "\r\n";
    }
    return os.str();
}

void write_atomic(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error("io-error", "cannot open " + tmp.string());
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        f.flush();
        if (!f) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw Error("io-error", "failed writing " + tmp.string());
        }
    }
    fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read " + path.string());
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

OutputSet::OutputSet(fs::path dir) : dir_(std::move(dir)) {}

OutputSet::~OutputSet() = default;

void OutputSet::add_text(const std::string& name, std::string content) { files_[name] = std::move(content); }

std::vector<fs::path> OutputSet::commit() {
    fs::create_directories(dir_);
    const fs::path stage = dir_ / (".staging." + std::to_string(::getpid()));
    std::error_code ec;
    fs::remove_all(stage, ec);
    fs::create_directories(stage);
    try {
        for (const auto& [name, content] : files_) {
            std::ofstream f(stage / name, std::ios::binary | std::ios::trunc);
            f.write(content.data(), static_cast<std::streamsize>(content.size()));
            if (!f) throw Error("io-error", "failed writing " + (stage / name).string());
        }
    } catch (...) {
        fs::remove_all(stage, ec);
        throw;
    }
    std::vector<fs::path> out;
    for (const auto& [name, content] : files_) {
        fs::rename(stage / name, dir_ / name);
        out.push_back(dir_ / name);
    }
    fs::remove_all(stage, ec);
    return out;
}

}  // namespace darkchain
