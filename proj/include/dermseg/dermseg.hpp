#pragma once

#include "dermseg/image.hpp"
#include "dermseg/imgcore.hpp"
#include "dermseg/preprocess.hpp"
#include "dermseg/colormodel.hpp"
#include "dermseg/cluster.hpp"
#include "dermseg/segment.hpp"
#include "dermseg/eval.hpp"
#include "dermseg/config.hpp"
#include "dermseg/dataset.hpp"
#include "dermseg/io.hpp"
#include "dermseg/pipeline.hpp"
