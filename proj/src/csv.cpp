#include "memfuse/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "memfuse/error.hpp"

namespace memfuse {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

NumericRows parse_numeric_csv(std::string_view text, const std::string& source,
                              std::optional<std::size_t> expected_cols) {
    NumericRows rows;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = std::min(text.find('\n', pos), text.size());
        std::string_view line = trim(text.substr(pos, eol - pos));
        ++line_no;
        pos = eol + 1;
        if (line.empty()) {
            if (eol == text.size()) break;
            continue;
        }
        std::vector<double> row;
        std::size_t col = 0;
        std::size_t cpos = 0;
        while (true) {
            const std::size_t comma = std::min(line.find(',', cpos), line.size());
            std::string_view cell = trim(line.substr(cpos, comma - cpos));
            ++col;
            double v = 0.0;
            if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
            auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (cell.empty() || ec != std::errc() || end != cell.data() + cell.size()) {
                throw InputError(source + ": line " + std::to_string(line_no) + ", column " + std::to_string(col) +
                                 ": cannot parse '" + std::string(cell) + "' as a number");
            }
            if (!std::isfinite(v)) {
                throw InputError(source + ": line " + std::to_string(line_no) + ", column " + std::to_string(col) +
                                 ": non-finite value '" + std::string(cell) + "'");
            }
            row.push_back(v);
            if (comma == line.size()) break;
            cpos = comma + 1;
        }
        const std::size_t want = expected_cols ? *expected_cols : (rows.empty() ? row.size() : rows.front().size());
        if (row.size() != want) {
            throw InputError(source + ": line " + std::to_string(line_no) + ": expected " + std::to_string(want) +
                             " columns, found " + std::to_string(row.size()));
        }
        rows.push_back(std::move(row));
        if (eol == text.size()) break;
    }
    return rows;
}

NumericRows read_numeric_csv(const std::filesystem::path& path, std::optional<std::size_t> expected_cols) {
    return parse_numeric_csv(read_text_file(path), path.string(), expected_cols);
}

std::string format_double(double v, std::optional<int> decimals) {
    char buf[64];
    std::to_chars_result res{};
    if (decimals) {
        res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, *decimals);
    } else {
        res = std::to_chars(buf, buf + sizeof(buf), v);
    }
    std::string s(buf, res.ptr);
    if (s == "-0" || (decimals && s.find_first_not_of("-0.") == std::string::npos && s.front() == '-')) {
        s.erase(0, 1);
    }
    return s;
}

std::string format_numeric_csv(const NumericRows& rows, std::optional<int> decimals) {
    std::string out;
    for (const auto& row : rows) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) out += ',';
            out += format_double(row[j], decimals);
        }
        out += '\n';
    }
    return out;
}

void write_numeric_csv(const std::filesystem::path& path, const NumericRows& rows, std::optional<int> decimals) {
    write_text_file(path, format_numeric_csv(rows, decimals));
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

}  // namespace memfuse
