#pragma once

#include "asrel/c2p.hpp"
#include "asrel/ingest.hpp"
#include "asrel/p2p.hpp"
#include "asrel/pipeline.hpp"
#include "asrel/rank.hpp"
#include "asrel/sibling.hpp"
#include "asrel/synth.hpp"
#include "asrel/topology.hpp"
#include "asrel/types.hpp"
