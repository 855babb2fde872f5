#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bwpred/csv.hpp"
#include "bwpred/rng.hpp"
#include "bwpred/telemetry.hpp"

namespace bwpred {

inline constexpr int kAggFeatures = 86;
inline constexpr int kSystemFeatures = 29;
inline constexpr int kInputFeatures = 116;  // 86 + 29 + max_bitrate

/// The 21 per-flow fields that are aggregated across active flows.
inline const std::vector<std::string>& agg_base_fields() {
  static const std::vector<std::string> f = {
      "total_fpackets", "total_fvolume", "total_bpackets", "total_bvolume",
      "mean_fpktl",     "std_fpktl",     "mean_bpktl",     "std_bpktl",
      "mean_fiat",      "mean_biat",     "duration",       "mean_active",
      "mean_idle",      "sflow_fpackets", "sflow_fbytes",  "sflow_bpackets",
      "sflow_bbytes",   "fpsh_cnt",      "bpsh_cnt",       "total_fhlen",
      "total_bhlen"};
  return f;
}

inline std::array<double, 21> agg_base_values(const FlowRecordView& r) {
  return {static_cast<double>(r.total_fpackets),
          r.total_fvolume,
          static_cast<double>(r.total_bpackets),
          r.total_bvolume,
          r.mean_fpktl,
          r.std_fpktl,
          r.mean_bpktl,
          r.std_bpktl,
          r.mean_fiat,
          r.mean_biat,
          r.duration,
          r.mean_active,
          r.mean_idle,
          r.sflow_fpackets,
          r.sflow_fbytes,
          r.sflow_bpackets,
          r.sflow_bbytes,
          static_cast<double>(r.fpsh_cnt),
          static_cast<double>(r.bpsh_cnt),
          r.total_fhlen,
          r.total_bhlen};
}

inline const std::vector<std::string>& agg_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c;
    for (const std::string& f : agg_base_fields())
      for (const char* fn : {"min_", "max_", "mean_", "sum_"}) c.push_back(fn + f);
    c.push_back("tcp_flow_count");
    c.push_back("udp_flow_count");
    return c;
  }();
  return cols;
}

/// min/max/mean/sum over each of the 21 base fields plus TCP and UDP flow
/// counts: 86 values. An empty flow list yields all zeros (an idle link is a
/// meaningful observation, not a missing one).
inline std::array<double, kAggFeatures> aggregate_flows(const std::vector<FlowRecordView>& flows) {
  std::array<double, kAggFeatures> out{};
  if (flows.empty()) return out;
  for (int f = 0; f < 21; ++f) {
    double mn = std::numeric_limits<double>::infinity();
    double mx = -std::numeric_limits<double>::infinity();
    double sum = 0;
    for (const FlowRecordView& r : flows) {
      double v = agg_base_values(r)[static_cast<std::size_t>(f)];
      mn = std::min(mn, v);
      mx = std::max(mx, v);
      sum += v;
    }
    out[f * 4 + 0] = mn;
    out[f * 4 + 1] = mx;
    out[f * 4 + 2] = sum / static_cast<double>(flows.size());
    out[f * 4 + 3] = sum;
  }
  for (const FlowRecordView& r : flows)
    (r.proto == 6 ? out[84] : out[85]) += 1.0;
  return out;
}

inline const std::vector<std::string>& feature_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c = agg_columns();
    for (const std::string& s : system_csv_columns()) c.push_back(s);
    c.push_back("max_bitrate");
    return c;
  }();
  return cols;
}

/// Stamp of the input layout: any reordering or renaming of the 116 columns
/// changes the hash, and checkpoints refuse to run against a foreign layout.
inline std::string dataset_schema_hash() {
  std::string s = "bwpred-dataset-v1|";
  for (const std::string& c : feature_columns()) {
    s += c;
    s += ',';
  }
  s += "|future_bitrate";
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(s)));
  return buf;
}

struct InterfaceSample {
  std::int64_t timestamp = 0;
  std::array<double, kInputFeatures> x{};

  double max_bitrate() const { return x[kInputFeatures - 1]; }
};

struct JoinReport {
  std::int64_t joined = 0;
  std::int64_t dropped = 0;
};

/// Concatenates the aggregated flow block with the system block and appends
/// max_bitrate = max(download, upload) / capacity.
inline InterfaceSample join_samples(const std::array<double, kAggFeatures>& agg,
                                    const SystemStats& sys, std::int64_t timestamp,
                                    double capacity_bps) {
  InterfaceSample s;
  s.timestamp = timestamp;
  for (int i = 0; i < kAggFeatures; ++i) s.x[i] = agg[i];
  std::vector<double> sv = system_stats_values(sys);
  for (int i = 0; i < kSystemFeatures; ++i) s.x[kAggFeatures + i] = sv[i];
  s.x[kInputFeatures - 1] = std::max(sys.download_bitrate, sys.upload_bitrate) / capacity_bps;
  return s;
}

/// Rows of a labeled per-interface dataset, in timestamp order.
struct InterfaceDataset {
  std::string interface;
  std::vector<std::int64_t> timestamps;
  std::vector<double> x;  // rows * kInputFeatures, row-major
  std::vector<double> y;  // future_bitrate
  int offset = 5;
  double interval_s = 3.0;
  std::string schema_hash = dataset_schema_hash();

  std::size_t rows() const { return y.size(); }
  const double* row(std::size_t i) const { return x.data() + i * kInputFeatures; }
};

/// future_bitrate[t] = max_bitrate[t + offset]; the trailing `offset` samples
/// have no label and are dropped.
inline InterfaceDataset label_and_shift(const std::string& interface,
                                        const std::vector<InterfaceSample>& samples, int offset,
                                        double interval_s) {
  if (offset < 1) throw std::runtime_error("offset must be >= 1");
  if (samples.size() <= static_cast<std::size_t>(offset))
    throw std::runtime_error("not enough samples for offset " + std::to_string(offset) +
                             " on " + interface);
  InterfaceDataset ds;
  ds.interface = interface;
  ds.offset = offset;
  ds.interval_s = interval_s;
  std::size_t n = samples.size() - static_cast<std::size_t>(offset);
  ds.x.reserve(n * kInputFeatures);
  for (std::size_t t = 0; t < n; ++t) {
    ds.timestamps.push_back(samples[t].timestamp);
    ds.x.insert(ds.x.end(), samples[t].x.begin(), samples[t].x.end());
    ds.y.push_back(samples[t + static_cast<std::size_t>(offset)].max_bitrate());
  }
  return ds;
}

/// Min-max scaling to [0,1], fitted on training data only; constant columns
/// map to zero and validation values are allowed to fall outside [0,1].
/// The target is already a ratio and is never rescaled.
struct Scaler {
  std::vector<double> mn, mx;

  static Scaler fit(const std::vector<const InterfaceDataset*>& sets) {
    Scaler s;
    s.mn.assign(kInputFeatures, std::numeric_limits<double>::infinity());
    s.mx.assign(kInputFeatures, -std::numeric_limits<double>::infinity());
    std::size_t total = 0;
    for (const InterfaceDataset* ds : sets) {
      total += ds->rows();
      for (std::size_t r = 0; r < ds->rows(); ++r) {
        const double* row = ds->row(r);
        for (int c = 0; c < kInputFeatures; ++c) {
          s.mn[c] = std::min(s.mn[c], row[c]);
          s.mx[c] = std::max(s.mx[c], row[c]);
        }
      }
    }
    if (total == 0) throw std::runtime_error("scaler: empty fitting set");
    return s;
  }

  double transform_one(int col, double v) const {
    double range = mx[col] - mn[col];
    return range > 0 ? (v - mn[col]) / range : 0.0;
  }

  std::vector<double> transform(const std::vector<double>& x) const {
    std::vector<double> out(x.size());
    std::size_t nrows = x.size() / kInputFeatures;
    for (std::size_t r = 0; r < nrows; ++r)
      for (int c = 0; c < kInputFeatures; ++c)
        out[r * kInputFeatures + c] = transform_one(c, x[r * kInputFeatures + c]);
    return out;
  }
};

/// Leave-one-interface-out folds: fold i validates on interface i and trains
/// on the rest.
struct Fold {
  std::vector<std::size_t> train;
  std::size_t validation = 0;
};

inline std::vector<Fold> make_folds(std::size_t k) {
  if (k < 2) throw std::runtime_error("k-fold needs at least 2 interface datasets");
  std::vector<Fold> folds(k);
  for (std::size_t i = 0; i < k; ++i) {
    folds[i].validation = i;
    for (std::size_t j = 0; j < k; ++j)
      if (j != i) folds[i].train.push_back(j);
  }
  return folds;
}

// -- telemetry directory -> samples --------------------------------------

inline FlowRecordView flow_record_from_csv(const CsvTable& t, std::size_t row) {
  const auto& r = t.rows[row];
  auto d = [&](const char* name) { return parse_double(r[static_cast<std::size_t>(t.column(name))]); };
  auto i64 = [&](const char* name) { return parse_int(r[static_cast<std::size_t>(t.column(name))]); };
  FlowRecordView v;
  v.srcip = r[static_cast<std::size_t>(t.column("srcip"))];
  v.dstip = r[static_cast<std::size_t>(t.column("dstip"))];
  v.srcport = static_cast<int>(i64("srcport"));
  v.dstport = static_cast<int>(i64("dstport"));
  v.proto = static_cast<int>(i64("proto"));
  v.first_ts = d("first_ts");
  v.last_ts = d("last_ts");
  v.total_fpackets = i64("total_fpackets");
  v.total_fvolume = d("total_fvolume");
  v.total_bpackets = i64("total_bpackets");
  v.total_bvolume = d("total_bvolume");
  v.min_fpktl = d("min_fpktl");
  v.mean_fpktl = d("mean_fpktl");
  v.max_fpktl = d("max_fpktl");
  v.std_fpktl = d("std_fpktl");
  v.min_bpktl = d("min_bpktl");
  v.mean_bpktl = d("mean_bpktl");
  v.max_bpktl = d("max_bpktl");
  v.std_bpktl = d("std_bpktl");
  v.min_fiat = d("min_fiat");
  v.mean_fiat = d("mean_fiat");
  v.max_fiat = d("max_fiat");
  v.std_fiat = d("std_fiat");
  v.min_biat = d("min_biat");
  v.mean_biat = d("mean_biat");
  v.max_biat = d("max_biat");
  v.std_biat = d("std_biat");
  v.duration = d("duration");
  v.min_active = d("min_active");
  v.mean_active = d("mean_active");
  v.max_active = d("max_active");
  v.std_active = d("std_active");
  v.min_idle = d("min_idle");
  v.mean_idle = d("mean_idle");
  v.max_idle = d("max_idle");
  v.std_idle = d("std_idle");
  v.sflow_fpackets = d("sflow_fpackets");
  v.sflow_fbytes = d("sflow_fbytes");
  v.sflow_bpackets = d("sflow_bpackets");
  v.sflow_bbytes = d("sflow_bbytes");
  v.fpsh_cnt = i64("fpsh_cnt");
  v.bpsh_cnt = i64("bpsh_cnt");
  v.furg_cnt = i64("furg_cnt");
  v.burg_cnt = i64("burg_cnt");
  v.total_fhlen = d("total_fhlen");
  v.total_bhlen = d("total_bhlen");
  return v;
}

/// Joins one interface's flow-table files with its system.csv by timestamp.
/// A tick whose flow file is more than 1 s away is dropped and counted.
inline std::vector<InterfaceSample> read_interface_samples(const std::string& iface_dir,
                                                           double capacity_bps,
                                                           JoinReport& report) {
  namespace fs = std::filesystem;
  CsvTable sys = read_csv((fs::path(iface_dir) / "system.csv").string());
  std::vector<InterfaceSample> samples;
  std::map<std::string, int> syscol;
  for (std::size_t i = 0; i < sys.header.size(); ++i) syscol[sys.header[i]] = static_cast<int>(i);

  for (std::size_t ri = 0; ri < sys.rows.size(); ++ri) {
    const auto& row = sys.rows[ri];
    std::int64_t ts = parse_int(row[0]);
    std::string flows_path;
    for (std::int64_t delta : {0, -1, 1}) {
      fs::path p = fs::path(iface_dir) / ("flows_" + std::to_string(ts + delta) + ".csv");
      if (fs::exists(p)) {
        flows_path = p.string();
        break;
      }
    }
    if (flows_path.empty()) {
      ++report.dropped;
      continue;
    }
    CsvTable ft = read_csv(flows_path);
    std::vector<FlowRecordView> flows;
    for (std::size_t fr = 0; fr < ft.rows.size(); ++fr)
      flows.push_back(flow_record_from_csv(ft, fr));

    SystemStats stats;
    std::vector<double> vals;
    for (const std::string& name : system_csv_columns())
      vals.push_back(parse_double(row[static_cast<std::size_t>(syscol.at(name))]));
    // rebuild the struct in column order
    SystemStats* sp = &stats;
    double* fields[] = {&sp->cpu_usr,   &sp->cpu_sys,   &sp->cpu_idl,   &sp->cpu_wai,
                        &sp->cpu_stl,   &sp->mem_used,  &sp->mem_free,  &sp->mem_buff,
                        &sp->mem_cach,  &sp->page_in,   &sp->page_out,  &sp->disk_read,
                        &sp->disk_writ, &sp->io_read,   &sp->io_writ,   &sp->interrupts,
                        &sp->ctx_switches, &sp->load_1m, &sp->load_5m,  &sp->load_15m,
                        &sp->procs_run, &sp->procs_blk, &sp->procs_new, &sp->swap_used,
                        &sp->swap_free, &sp->tcp_est,   &sp->tcp_tw,    &sp->download_bitrate,
                        &sp->upload_bitrate};
    for (std::size_t i = 0; i < vals.size(); ++i) *fields[i] = vals[i];

    samples.push_back(join_samples(aggregate_flows(flows), stats, ts, capacity_bps));
    ++report.joined;
  }
  return samples;
}

inline double capacity_of_interface(const Topology& topo, const std::string& iface_id) {
  auto dot = iface_id.find('.');
  if (dot == std::string::npos) throw std::runtime_error("bad interface id: " + iface_id);
  int li = topo.link_index(iface_id.substr(dot + 1));
  if (li < 0) throw std::runtime_error("interface references unknown link: " + iface_id);
  return topo.links[static_cast<std::size_t>(li)].capacity_bps;
}

// -- dataset files ---------------------------------------------------------

inline void write_dataset(const InterfaceDataset& ds, const std::string& csv_path,
                          const std::string& meta_path) {
  std::ofstream out(csv_path);
  if (!out) throw std::runtime_error("cannot write " + csv_path);
  std::vector<std::string> hdr{"timestamp"};
  for (const std::string& c : feature_columns()) hdr.push_back(c);
  hdr.push_back("future_bitrate");
  out << join_csv(hdr);
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    std::vector<std::string> cells{std::to_string(ds.timestamps[r])};
    const double* row = ds.row(r);
    for (int c = 0; c < kInputFeatures; ++c) cells.push_back(format_double(row[c]));
    cells.push_back(format_double(ds.y[r]));
    out << join_csv(cells);
  }

  Scaler own = Scaler::fit({&ds});
  nlohmann::json meta{{"interface", ds.interface},
                      {"rows", ds.rows()},
                      {"offset", ds.offset},
                      {"interval_secs", ds.interval_s},
                      {"schema_hash", ds.schema_hash},
                      {"scaler", {{"min", own.mn}, {"max", own.mx}}}};
  write_file(meta_path, meta.dump(2) + "\n");
}

inline InterfaceDataset read_dataset(const std::string& csv_path, const std::string& meta_path) {
  CsvTable t = read_csv(csv_path);
  std::vector<std::string> want{"timestamp"};
  for (const std::string& c : feature_columns()) want.push_back(c);
  want.push_back("future_bitrate");
  if (t.header != want)
    throw std::runtime_error(csv_path + ": column layout does not match this schema");

  nlohmann::json meta = nlohmann::json::parse(read_file(meta_path));
  InterfaceDataset ds;
  ds.interface = meta.at("interface").get<std::string>();
  ds.offset = meta.at("offset").get<int>();
  ds.interval_s = meta.at("interval_secs").get<double>();
  std::string hash = meta.at("schema_hash").get<std::string>();
  if (hash != dataset_schema_hash())
    throw std::runtime_error(meta_path + ": schema hash mismatch");
  ds.x.reserve(t.rows.size() * kInputFeatures);
  for (const auto& row : t.rows) {
    ds.timestamps.push_back(parse_int(row[0]));
    for (int c = 0; c < kInputFeatures; ++c)
      ds.x.push_back(parse_double(row[static_cast<std::size_t>(c) + 1]));
    ds.y.push_back(parse_double(row.back()));
  }
  return ds;
}

}  // namespace bwpred
