#pragma once

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "bwpred/arima.hpp"
#include "bwpred/csv.hpp"
#include "bwpred/features.hpp"
#include "bwpred/lstm.hpp"
#include "bwpred/metrics.hpp"
#include "bwpred/mlp.hpp"
#include "bwpred/train.hpp"

namespace bwpred {

enum class ModelKind { Arima, Mlp, Lstm };

inline const char* model_name(ModelKind k) {
  switch (k) {
    case ModelKind::Arima: return "ARIMA";
    case ModelKind::Mlp: return "MLP";
    case ModelKind::Lstm: return "LSTM";
  }
  return "?";
}

inline ModelKind model_kind_from(const std::string& s) {
  if (s == "arima" || s == "ARIMA") return ModelKind::Arima;
  if (s == "mlp" || s == "MLP") return ModelKind::Mlp;
  if (s == "lstm" || s == "LSTM") return ModelKind::Lstm;
  throw std::runtime_error("unknown model kind: " + s);
}

struct FoldResult {
  std::size_t fold = 0;
  std::string interface;
  Metrics metrics;
  double target_variance = 0.0;
  std::vector<double> predictions;  // clamped to [0,1]
  std::vector<double> actuals;
  std::vector<std::int64_t> timestamps;
};

struct MetricsReport {
  ModelKind kind = ModelKind::Mlp;
  std::vector<FoldResult> folds;
  Metrics average;  // arithmetic mean of the per-fold metrics
};

namespace eval_detail {

inline double series_variance(const std::vector<double>& y) {
  if (y.size() < 2) return 0.0;
  double mean = 0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double s = 0;
  for (double v : y) s += (v - mean) * (v - mean);
  return s / static_cast<double>(y.size());
}

/// The utilization series an ARIMA walks over: the current max_bitrate input.
inline std::vector<double> max_bitrate_series(const InterfaceDataset& ds) {
  std::vector<double> out(ds.rows());
  for (std::size_t r = 0; r < ds.rows(); ++r) out[r] = ds.row(r)[kInputFeatures - 1];
  return out;
}

}  // namespace eval_detail

/// Leave-one-interface-out cross-validation. A fresh model is trained per
/// fold with seed `base_seed ^ fold_index`; the min-max scaler is fitted on
/// the training folds only. The ARIMA path ignores the feature matrix: it is
/// fitted on the concatenated training-interface utilization series and
/// walked forward over the validation series, forecasting `offset` steps
/// ahead at every row.
inline MetricsReport cross_validate(ModelKind kind, const std::vector<InterfaceDataset>& datasets,
                                    const TrainConfig& cfg, std::uint64_t base_seed) {
  if (datasets.size() < 2)
    throw std::runtime_error("cross_validate: need at least 2 interface datasets");
  std::vector<Fold> folds = make_folds(datasets.size());
  MetricsReport report;
  report.kind = kind;

  for (std::size_t fi = 0; fi < folds.size(); ++fi) {
    const Fold& fold = folds[fi];
    const InterfaceDataset& val = datasets[fold.validation];
    FoldResult fr;
    fr.fold = fi;
    fr.interface = val.interface;
    fr.actuals = val.y;
    fr.timestamps = val.timestamps;
    fr.target_variance = eval_detail::series_variance(val.y);

    try {
      if (kind == ModelKind::Arima) {
        std::vector<double> train_series;
        for (std::size_t ti : fold.train) {
          std::vector<double> s = eval_detail::max_bitrate_series(datasets[ti]);
          train_series.insert(train_series.end(), s.begin(), s.end());
        }
        ArimaModel model = arima_fit(train_series);
        ArimaWalk walk(model);
        std::vector<double> val_series = eval_detail::max_bitrate_series(val);
        fr.predictions.reserve(val_series.size());
        for (double yv : val_series) {
          walk.push(yv);
          fr.predictions.push_back(std::clamp(walk.predict(val.offset), 0.0, 1.0));
        }
      } else {
        std::vector<const InterfaceDataset*> train_sets;
        for (std::size_t ti : fold.train) train_sets.push_back(&datasets[ti]);
        Scaler scaler = Scaler::fit(train_sets);

        TrainConfig fold_cfg = cfg;
        fold_cfg.seed = base_seed ^ static_cast<std::uint64_t>(fi);

        if (kind == ModelKind::Mlp) {
          std::vector<double> x, y;
          for (const InterfaceDataset* ds : train_sets) {
            std::vector<double> xs = scaler.transform(ds->x);
            x.insert(x.end(), xs.begin(), xs.end());
            y.insert(y.end(), ds->y.begin(), ds->y.end());
          }
          MlpFit fit = fit_mlp(x, y, fold_cfg);
          std::vector<double> val_x = scaler.transform(val.x);
          fr.predictions = mlp_predict(fit.model, val_x.data(), static_cast<int>(val.rows()));
        } else {
          std::vector<std::vector<double>> xs(train_sets.size());
          std::vector<SeriesView> views;
          for (std::size_t i = 0; i < train_sets.size(); ++i) {
            xs[i] = scaler.transform(train_sets[i]->x);
            views.push_back({xs[i].data(), train_sets[i]->y.data(), train_sets[i]->rows()});
          }
          LstmFit fit = fit_lstm(views, fold_cfg);
          std::vector<double> val_x = scaler.transform(val.x);
          fr.predictions = lstm_predict_series(fit.model, val_x.data(), val.rows());
        }
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("fold " + std::to_string(fi) + " (" + val.interface +
                               "): " + e.what());
    }
    fr.metrics = compute_metrics(fr.predictions, fr.actuals);
    report.folds.push_back(std::move(fr));
  }

  for (const FoldResult& fr : report.folds) {
    report.average.bias += fr.metrics.bias;
    report.average.mae += fr.metrics.mae;
    report.average.mse += fr.metrics.mse;
    report.average.rmse += fr.metrics.rmse;
    report.average.n += fr.metrics.n;
  }
  double k = static_cast<double>(report.folds.size());
  report.average.bias /= k;
  report.average.mae /= k;
  report.average.mse /= k;
  report.average.rmse /= k;
  return report;
}

/// CSV trace behind the prediction-vs-actual figures.
inline void emit_trace(const std::vector<std::int64_t>& timestamps,
                       const std::vector<double>& actual, const std::vector<double>& predicted,
                       const std::string& path) {
  if (timestamps.size() != actual.size() || actual.size() != predicted.size())
    throw std::runtime_error("emit_trace: length mismatch");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "timestamp,actual,predicted,difference\n";
  for (std::size_t i = 0; i < actual.size(); ++i) {
    out << timestamps[i] << ',' << format_double(actual[i]) << ',' << format_double(predicted[i])
        << ',' << format_double(predicted[i] - actual[i]) << '\n';
  }
}

inline void write_report_csv(const std::vector<MetricsReport>& reports, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "model,fold,interface,bias,mae,mse,rmse,n,target_variance\n";
  for (const MetricsReport& rep : reports) {
    for (const FoldResult& fr : rep.folds) {
      out << model_name(rep.kind) << ',' << fr.fold << ',' << fr.interface << ','
          << format_double(fr.metrics.bias) << ',' << format_double(fr.metrics.mae) << ','
          << format_double(fr.metrics.mse) << ',' << format_double(fr.metrics.rmse) << ','
          << fr.metrics.n << ',' << format_double(fr.target_variance) << '\n';
    }
    out << model_name(rep.kind) << ",avg,-," << format_double(rep.average.bias) << ','
        << format_double(rep.average.mae) << ',' << format_double(rep.average.mse) << ','
        << format_double(rep.average.rmse) << ',' << rep.average.n << ",\n";
  }
}

inline void print_report(const MetricsReport& rep, std::ostream& os = std::cout) {
  os << "== " << model_name(rep.kind) << " k-fold cross-validation ==\n";
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-6s %-10s %12s %12s %12s %12s %10s\n", "fold", "interface",
                "bias", "mae", "mse", "rmse", "var");
  os << buf;
  for (const FoldResult& fr : rep.folds) {
    std::snprintf(buf, sizeof(buf), "%-6zu %-10s %12.6f %12.6f %12.6f %12.6f %10.6f\n", fr.fold,
                  fr.interface.c_str(), fr.metrics.bias, fr.metrics.mae, fr.metrics.mse,
                  fr.metrics.rmse, fr.target_variance);
    os << buf;
  }
  std::snprintf(buf, sizeof(buf), "%-6s %-10s %12.6f %12.6f %12.6f %12.6f\n", "avg", "-",
                rep.average.bias, rep.average.mae, rep.average.mse, rep.average.rmse);
  os << buf;
}

/// Summary table in the layout of the paper-style scores table.
inline void print_summary_table(const std::vector<MetricsReport>& reports,
                                std::ostream& os = std::cout) {
  os << "== Averaged k-fold cross-validation scores ==\n";
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-8s %12s %12s %12s %12s\n", "Model", "Avg. Bias", "Avg. MAE",
                "Avg. MSE", "Avg. RMSE");
  os << buf;
  for (const MetricsReport& rep : reports) {
    std::snprintf(buf, sizeof(buf), "%-8s %12.6f %12.6f %12.6f %12.6f\n", model_name(rep.kind),
                  rep.average.bias, rep.average.mae, rep.average.mse, rep.average.rmse);
    os << buf;
  }
}

}  // namespace bwpred
