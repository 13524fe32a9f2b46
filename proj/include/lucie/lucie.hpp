#pragma once

#include "lucie/archive.hpp"
#include "lucie/cli.hpp"
#include "lucie/corpus.hpp"
#include "lucie/edit_distance.hpp"
#include "lucie/error.hpp"
#include "lucie/fetch.hpp"
#include "lucie/model.hpp"
#include "lucie/pipeline.hpp"
#include "lucie/sniffer.hpp"
