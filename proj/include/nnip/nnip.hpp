#pragma once

#include "nnip/block_spec.hpp"
#include "nnip/collapse.hpp"
#include "nnip/conventional.hpp"
#include "nnip/export.hpp"
#include "nnip/harness.hpp"
#include "nnip/image.hpp"
#include "nnip/model.hpp"
#include "nnip/model_io.hpp"
#include "nnip/references.hpp"
#include "nnip/trainer.hpp"
