#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bsv/errors.hpp"

namespace bsv {

/// Minimal CSV writer with deterministic number formatting.
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : out_(path) {
        if (!out_) throw NumericError("cannot open for writing: " + path);
    }

    void header(const std::string& line) { out_ << line << "\n"; }

    CsvWriter& field(double v) {
        sep();
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.12g", v);
        out_ << buf;
        return *this;
    }
    CsvWriter& field(long long v) {
        sep();
        out_ << v;
        return *this;
    }
    CsvWriter& field(int v) { return field(static_cast<long long>(v)); }
    CsvWriter& field(const std::string& v) {
        sep();
        out_ << v;
        return *this;
    }
    void endrow() {
        out_ << "\n";
        first_ = true;
    }

private:
    void sep() {
        if (!first_) out_ << ',';
        first_ = false;
    }
    std::ofstream out_;
    bool first_ = true;
};

/// Tiny reader used by tests and the validate scenario round trips.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    static CsvTable read(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw NumericError("cannot open for reading: " + path);
        CsvTable t;
        std::string line;
        bool first = true;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::istringstream ss(line);
            std::string cell;
            if (first) {
                while (std::getline(ss, cell, ',')) t.header.push_back(cell);
                first = false;
                continue;
            }
            std::vector<double> row;
            while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
            t.rows.push_back(std::move(row));
        }
        return t;
    }

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw NumericError("CSV column not found: " + name);
    }
};

}  // namespace bsv
