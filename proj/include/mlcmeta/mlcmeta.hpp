#pragma once

#include "mlcmeta/arff.hpp"
#include "mlcmeta/catalogue.hpp"
#include "mlcmeta/csv.hpp"
#include "mlcmeta/dataset.hpp"
#include "mlcmeta/dataset_csv.hpp"
#include "mlcmeta/error.hpp"
#include "mlcmeta/measures.hpp"
#include "mlcmeta/meta_features.hpp"
#include "mlcmeta/meta_pipeline.hpp"
#include "mlcmeta/pct.hpp"
#include "mlcmeta/results.hpp"
#include "mlcmeta/rng.hpp"
#include "mlcmeta/stats.hpp"
#include "mlcmeta/stratify.hpp"
#include "mlcmeta/text.hpp"
#include "mlcmeta/version.hpp"
