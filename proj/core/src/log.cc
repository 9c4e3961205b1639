#include "deephate/log.h"

#include <iostream>
#include <mutex>

namespace deephate::log {
namespace {

std::mutex& sink_mutex() {
  static std::mutex mu;
  return mu;
}

Level& min_level() {
  static Level level = Level::kInfo;
  return level;
}

const char* level_name(Level level) {
  switch (level) {
    case Level::kDebug: return "debug";
    case Level::kInfo: return "info";
    case Level::kWarning: return "warning";
    case Level::kError: return "error";
  }
  return "?";
}

Sink& current_sink() {
  static Sink sink = [](Level level, std::string_view message) {
    if (level < min_level()) return;
    std::cerr << "[" << level_name(level) << "] " << message << "\n";
  };
  return sink;
}

}  // namespace

Sink set_sink(Sink sink) {
  std::lock_guard<std::mutex> lock(sink_mutex());
  Sink previous = std::move(current_sink());
  current_sink() = std::move(sink);
  return previous;
}

void set_min_level(Level level) { min_level() = level; }

void write(Level level, std::string_view message) {
  std::lock_guard<std::mutex> lock(sink_mutex());
  if (current_sink()) current_sink()(level, message);
}

ScopedCapture::ScopedCapture() {
  previous_ = set_sink([this](Level level, std::string_view message) {
    if (level == Level::kWarning) warnings_.emplace_back(message);
  });
}

ScopedCapture::~ScopedCapture() { set_sink(std::move(previous_)); }

bool ScopedCapture::saw_warning_containing(std::string_view needle) const {
  for (const auto& w : warnings_) {
    if (w.find(needle) != std::string::npos) return true;
  }
  return false;
}

}  // namespace deephate::log
