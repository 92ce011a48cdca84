#pragma once

#include <string>

#include "mrccs/kv.hpp"
#include "mrccs/params.hpp"
#include "mrccs/sensing.hpp"

namespace mrccs {

// Binary container: magic, format version, a key=value config blob, the named
// float arrays in insertion order (name, rank, dims, float32 little-endian
// payload), and a trailing CRC-32 over everything after the magic. Loading
// verifies magic, version, and checksum and restores arrays in file order, so
// a save/load round trip is bit-exact.
struct ParamContainer {
  KvMap config;
  ParamStore params;
};

void save_checkpoint(const std::string& path, const KvMap& config,
                     const ParamStore& store);
ParamContainer load_checkpoint(const std::string& path);

// Measurements travel in the same container layout under their own magic,
// with the sensing geometry and the source-image dims in the config blob.
struct MeasurementsFile {
  Measurements measurements;
  long source_height = 0;  // pre-padding image dims, for exact round trips
  long source_width = 0;
  KvMap config;
};

void save_measurements(const std::string& path, const Measurements& m,
                       long source_height, long source_width);
MeasurementsFile load_measurements(const std::string& path);

uint32_t crc32_ieee(const unsigned char* data, size_t n, uint32_t seed = 0);

}  // namespace mrccs
