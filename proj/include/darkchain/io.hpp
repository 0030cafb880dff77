#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace darkchain {

using Cell = std::variant<std::string, double, std::int64_t>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    explicit Table(std::vector<std::string> cols = {}) : columns(std::move(cols)) {}
    void add(std::vector<Cell> row);
    std::size_t size() const { return rows.size(); }
    int column(const std::string& name) const;  // -1 when absent
};

// RFC-4180 with '.' decimals and 17 significant digits.
std::string format_number(double v);
std::string csv_escape(const std::string& s);
std::string to_csv(const Table& t);

// Files staged under a temporary directory and renamed into place only when
// every file has been written, so a failed run leaves nothing behind.
class OutputSet {
public:
    explicit OutputSet(std::filesystem::path dir);
    ~OutputSet();
    OutputSet(const OutputSet&) = delete;
    OutputSet& operator=(const OutputSet&) = delete;

    void add_text(const std::string& name, std::string content);
    void add_table(const std::string& name, const Table& t) { add_text(name, to_csv(t)); }
    void add_json(const std::string& name, const nlohmann::json& j) { add_text(name, j.dump(2) + "\n"); }

    std::vector<std::filesystem::path> commit();

private:
    std::filesystem::path dir_;
    std::map<std::string, std::string> files_;
};

// Atomic single-file write (temp file + rename).
void write_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

}  // namespace darkchain
