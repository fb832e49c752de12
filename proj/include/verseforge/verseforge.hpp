#pragma once

#include "verseforge/corpus.hpp"
#include "verseforge/enhance.hpp"
#include "verseforge/error.hpp"
#include "verseforge/metrics.hpp"
#include "verseforge/phonetics.hpp"
#include "verseforge/pipeline.hpp"
#include "verseforge/random.hpp"
#include "verseforge/select.hpp"
#include "verseforge/stripping.hpp"
