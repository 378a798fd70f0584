#pragma once

#include "faceverify/cli.hpp"
#include "faceverify/config.hpp"
#include "faceverify/errors.hpp"
#include "faceverify/fusion.hpp"
#include "faceverify/gabor.hpp"
#include "faceverify/image.hpp"
#include "faceverify/knn.hpp"
#include "faceverify/linalg.hpp"
#include "faceverify/manifest.hpp"
#include "faceverify/metrics.hpp"
#include "faceverify/pipeline.hpp"
#include "faceverify/serialize.hpp"
#include "faceverify/subspace.hpp"
#include "faceverify/svm.hpp"
#include "faceverify/synthetic.hpp"
