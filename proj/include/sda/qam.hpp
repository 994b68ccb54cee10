#pragma once

#include <span>
#include <string>
#include <vector>

#include "sda/common.hpp"
#include "sda/crc.hpp"

namespace sda::modem {

enum class Modulation { bpsk = 0, qam4 = 1, qam16 = 2, qam64 = 3 };

int modulation_order(Modulation m);
int bits_per_symbol(Modulation m);
Modulation modulation_from_order(int order);
Modulation modulation_from_id(int id);
Modulation parse_modulation(const std::string& name);
const char* to_string(Modulation m);

/// Unit-average-energy Gray constellation; point index bits are the label, MSB first.
const CVector& constellation(Modulation m);

CVector map_symbols(std::span<const std::uint8_t> bits, Modulation m);

/// Max-log LLRs (positive favors bit 0); noise_var is per complex symbol.
std::vector<double> demap_llr(const CVector& symbols, Modulation m, double noise_var);
/// Per-symbol noise variances.
std::vector<double> demap_llr(const CVector& symbols, Modulation m, const RVector& noise_var);

Bits hard_demap(const CVector& symbols, Modulation m);
/// Nearest constellation point.
cplx slice(cplx symbol, Modulation m);

}  // namespace sda::modem
