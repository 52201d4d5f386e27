#include "hisq/perfmodel.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "hisq/error.hpp"

namespace hisq {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

double parse_positive(const std::string& key, const std::string& value, int line) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != value.size() || !(v > 0.0)) {
        throw InvalidArgument("device config line " + std::to_string(line) + ": " + key + "=" + value +
                              " is not a positive number");
    }
    return v;
}

} // namespace

double CostModel::link_bytes(LinkStorage s, Precision p) const noexcept {
    return static_cast<double>(links_per_kind * (smeared_reals + naik_reals(s)) * bytes_per_real(p));
}

double CostModel::vector_bytes_per_rhs(Precision p) const noexcept {
    return static_cast<double>(vectors_per_rhs * 6 * bytes_per_real(p));
}

double CostModel::arithmetic_intensity(int n_rhs, LinkStorage s, Precision p) const {
    if (n_rhs < 1) throw InvalidArgument("n_rhs must be >= 1");
    const double n = n_rhs;
    return static_cast<double>(flops_per_site_per_rhs) * n / (link_bytes(s, p) + n * vector_bytes_per_rhs(p));
}

double CostModel::asymptotic_intensity(Precision p) const noexcept {
    return static_cast<double>(flops_per_site_per_rhs) / vector_bytes_per_rhs(p);
}

const CostModel& CostModel::standard() noexcept {
    static const CostModel m{};
    return m;
}

double arithmetic_intensity(int n_rhs, LinkStorage s, Precision p) {
    return CostModel::standard().arithmetic_intensity(n_rhs, s, p);
}

double asymptotic_intensity(LinkStorage) { return CostModel::standard().asymptotic_intensity(); }

void DeviceSpec::validate() const {
    if (name.empty()) throw InvalidArgument("device needs a name");
    if (!(peak_fp32 > 0 && peak_fp64 > 0 && bandwidth > 0 && tdp > 0)) {
        throw InvalidArgument("device " + name + ": peaks, bandwidth and TDP must be positive");
    }
    if (measured_bandwidth && !(*measured_bandwidth > 0 && *measured_bandwidth <= bandwidth)) {
        throw InvalidArgument("device " + name + ": measured bandwidth must lie in (0, theoretical]");
    }
}

const std::vector<DeviceSpec>& device_catalog() {
    static const std::vector<DeviceSpec> catalog{
        {"Xeon Phi 5110P", 2020, 1010, 320, 140.0, 225},
        {"Tesla K20", 3520, 1170, 208, std::nullopt, 225},
        {"Tesla K40", 4290, 1430, 288, std::nullopt, 235},
        {"GTX Titan", 4500, 1500, 288, std::nullopt, 250},
    };
    return catalog;
}

const DeviceSpec& find_device(std::string_view name, const std::vector<DeviceSpec>& catalog) {
    const auto key = lower(name);
    for (const auto& d : catalog)
        if (lower(d.name) == key) return d;
    for (const auto& d : catalog) {
        std::istringstream words(lower(d.name));
        std::string w;
        while (words >> w)
            if (w == key) return d;
    }
    throw NotFound("unknown device '" + std::string(name) + "'");
}

const DeviceSpec& find_device(std::string_view name) { return find_device(name, device_catalog()); }

std::vector<DeviceSpec> parse_device_config(std::istream& in, std::vector<DeviceSpec> base) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::istringstream is(line);
        DeviceSpec d;
        if (!(is >> d.name)) continue;
        std::string kv;
        while (is >> kv) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) {
                throw InvalidArgument("device config line " + std::to_string(lineno) + ": expected key=value, got '" +
                                      kv + "'");
            }
            const auto key = kv.substr(0, eq);
            const double v = parse_positive(key, kv.substr(eq + 1), lineno);
            if (key == "peak_fp32") d.peak_fp32 = v;
            else if (key == "peak_fp64") d.peak_fp64 = v;
            else if (key == "bandwidth") d.bandwidth = v;
            else if (key == "measured_bandwidth") d.measured_bandwidth = v;
            else if (key == "tdp") d.tdp = v;
            else throw InvalidArgument("device config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
        d.validate();
        const auto same = [&](const DeviceSpec& e) { return lower(e.name) == lower(d.name); };
        if (auto it = std::find_if(base.begin(), base.end(), same); it != base.end()) *it = d;
        else base.push_back(d);
    }
    return base;
}

std::vector<DeviceSpec> load_device_config(const std::filesystem::path& path, std::vector<DeviceSpec> base) {
    std::ifstream in(path);
    if (!in) throw NotFound("cannot open device config " + path.string());
    return parse_device_config(in, std::move(base));
}

double roofline_predict(const DeviceSpec& device, int n_rhs, LinkStorage s, bool use_measured_bw, Precision p,
                        const CostModel& model) {
    double bw = device.bandwidth;
    if (use_measured_bw) {
        if (!device.measured_bandwidth) throw InvalidArgument("device " + device.name + " has no measured bandwidth");
        bw = *device.measured_bandwidth;
    }
    return std::min(model.arithmetic_intensity(n_rhs, s, p) * bw, device.peak(p));
}

double efficiency(double gflops, double watts) {
    if (!(watts > 0.0)) throw InvalidArgument("power must be positive");
    return gflops / watts;
}

} // namespace hisq
