#include "mvq/measure_io.hpp"

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace mvq {

std::string format_double(double value) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, value);
    return {buf, res.ptr};
}

double parse_double(const std::string& text) {
    double value{};
    auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
        throw std::invalid_argument("not a number: '" + text + "'");
    return value;
}

void atomic_write_file(const std::string& path, const std::string& contents) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
        out << contents;
        out.flush();
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw std::runtime_error("rename failed for " + target.string() + ": " + ec.message());
    }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    fields.push_back(field);
    return fields;
}

[[noreturn]] void row_error(const std::string& path, std::size_t line_no, const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + what);
}

std::uint64_t parse_id(const std::string& path, std::size_t line_no, const std::string& text) {
    std::uint64_t id{};
    auto res = std::from_chars(text.data(), text.data() + text.size(), id);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
        row_error(path, line_no, "bad measure_id '" + text + "'");
    return id;
}

}  // namespace

MeasureCollection load_measures_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": missing header");
    auto header = split_csv_line(line);
    if (header.size() < 3 || header[0] != "measure_id" || header[1] != "weight")
        throw std::runtime_error(path + ":1: expected header measure_id,weight,x1,...,xd");
    const std::size_t dim = header.size() - 2;
    for (std::size_t i = 0; i < dim; ++i) {
        if (header[i + 2] != "x" + std::to_string(i + 1))
            throw std::runtime_error(path + ":1: bad coordinate column '" + header[i + 2] + "'");
    }

    struct Rows {
        std::vector<double> coords;
        std::vector<double> weights;
    };
    std::map<std::uint64_t, Rows> grouped;

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_line(line);
        if (fields.size() != dim + 2)
            row_error(path, line_no,
                      "expected " + std::to_string(dim + 2) + " fields, got " +
                          std::to_string(fields.size()));
        std::uint64_t id = parse_id(path, line_no, fields[0]);
        Rows& rows = grouped[id];
        try {
            rows.weights.push_back(parse_double(fields[1]));
            for (std::size_t i = 0; i < dim; ++i)
                rows.coords.push_back(parse_double(fields[i + 2]));
        } catch (const std::invalid_argument& e) {
            row_error(path, line_no, e.what());
        }
    }

    std::vector<PointMeasure> measures;
    measures.reserve(grouped.size());
    for (auto& [id, rows] : grouped) {
        try {
            measures.emplace_back(dim, std::move(rows.coords), std::move(rows.weights));
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error(path + ": measure " + std::to_string(id) + ": " + e.what());
        }
    }
    return MeasureCollection(std::move(measures));
}

void save_measures_csv(const MeasureCollection& collection, const std::string& path) {
    std::ostringstream out;
    const std::size_t dim = collection.empty() ? 2 : collection.dim();
    out << "measure_id,weight";
    for (std::size_t i = 1; i <= dim; ++i) out << ",x" << i;
    out << "\n";
    for (std::size_t id = 0; id < collection.size(); ++id) {
        const PointMeasure& m = collection[id];
        for (std::size_t k = 0; k < m.size(); ++k) {
            out << id << ',' << format_double(m.weight(k));
            for (double c : m.point(k)) out << ',' << format_double(c);
            out << "\n";
        }
    }
    atomic_write_file(path, out.str());
}

MeasureCollection attach_labels_csv(MeasureCollection collection, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": missing header");
    auto header = split_csv_line(line);
    if (header.size() != 2 || header[0] != "measure_id" || header[1] != "label")
        throw std::runtime_error(path + ":1: expected header measure_id,label");

    std::map<std::uint64_t, int> by_id;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 2) row_error(path, line_no, "expected 2 fields");
        std::uint64_t id = parse_id(path, line_no, fields[0]);
        int label{};
        auto res = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), label);
        if (res.ec != std::errc{} || res.ptr != fields[1].data() + fields[1].size())
            row_error(path, line_no, "bad label '" + fields[1] + "'");
        if (!by_id.emplace(id, label).second)
            row_error(path, line_no, "duplicate measure_id " + std::to_string(id));
    }
    if (by_id.size() != collection.size())
        throw std::runtime_error(path + ": " + std::to_string(by_id.size()) + " labels for " +
                                 std::to_string(collection.size()) + " measures");
    std::vector<int> labels;
    labels.reserve(by_id.size());
    for (auto& [id, label] : by_id) labels.push_back(label);
    collection.set_labels(std::move(labels));
    return collection;
}

void save_labels_csv(const MeasureCollection& collection, const std::string& path) {
    std::ostringstream out;
    out << "measure_id,label\n";
    const auto& labels = collection.labels();
    for (std::size_t id = 0; id < labels.size(); ++id) out << id << ',' << labels[id] << "\n";
    atomic_write_file(path, out.str());
}

}  // namespace mvq
