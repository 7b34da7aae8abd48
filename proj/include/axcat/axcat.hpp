#ifndef AXCAT_AXCAT_HPP_
#define AXCAT_AXCAT_HPP_

#include "axcat/catlang.hpp"
#include "axcat/corpus.hpp"
#include "axcat/dot.hpp"
#include "axcat/engine.hpp"
#include "axcat/error.hpp"
#include "axcat/events.hpp"
#include "axcat/masm.hpp"
#include "axcat/models.hpp"
#include "axcat/relation.hpp"
#include "axcat/run.hpp"
#include "axcat/smt.hpp"
#include "axcat/speculation.hpp"

#endif  // AXCAT_AXCAT_HPP_
