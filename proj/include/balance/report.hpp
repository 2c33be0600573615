#pragma once

// Batch JSON and learning-curve CSV, both round-trippable: doubles are
// written in shortest round-trip form.

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "balance/error.hpp"

namespace balance {

struct BatchReport {
  std::vector<std::size_t> selected;
  std::vector<double> scores;
  double tau = 0.0;
  std::uint64_t seed = 0;

  friend bool operator==(const BatchReport&, const BatchReport&) = default;
};

inline std::string batch_to_json(const BatchReport& report) {
  const nlohmann::json j = {
      {"selected", report.selected}, {"scores", report.scores}, {"tau", report.tau}, {"seed", report.seed}};
  return j.dump(2) + "\n";
}

inline BatchReport batch_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    return {j.at("selected").get<std::vector<std::size_t>>(), j.at("scores").get<std::vector<double>>(),
            j.at("tau").get<double>(), j.at("seed").get<std::uint64_t>()};
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("batch JSON: ") + e.what());
  }
}

struct CurveRow {
  std::size_t round = 0;
  std::size_t labels = 0;
  double error = 0.0;
  double tau = 0.0;
  double ms = 0.0;

  friend bool operator==(const CurveRow&, const CurveRow&) = default;
};

using LearningCurve = std::vector<CurveRow>;

inline constexpr const char* kCurveHeader = "round,labels,error,tau,ms";

inline std::string format_double(double v) {
  char buffer[64];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), v);
  if (ec != std::errc()) throw Error("format_double: conversion failed");
  return {buffer, end};
}

inline std::string curve_to_csv(const LearningCurve& curve) {
  std::string out = std::string(kCurveHeader) + "\n";
  for (const auto& row : curve) {
    out += std::to_string(row.round) + "," + std::to_string(row.labels) + "," + format_double(row.error) + "," +
           format_double(row.tau) + "," + format_double(row.ms) + "\n";
  }
  return out;
}

inline LearningCurve curve_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCurveHeader) throw FormatError("curve CSV: bad header");
  LearningCurve curve;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream cells(line);
    while (std::getline(cells, field, ',')) fields.push_back(field);
    if (fields.size() != 5) throw FormatError("curve CSV: expected 5 fields in '" + line + "'");
    const auto parse = [&](const std::string& s, auto& target) {
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), target);
      if (ec != std::errc() || ptr != s.data() + s.size()) throw FormatError("curve CSV: bad number '" + s + "'");
    };
    CurveRow row;
    parse(fields[0], row.round);
    parse(fields[1], row.labels);
    parse(fields[2], row.error);
    parse(fields[3], row.tau);
    parse(fields[4], row.ms);
    curve.push_back(row);
  }
  return curve;
}

}  // namespace balance
