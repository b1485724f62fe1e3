# utils.py

'''
utils.py

Purpose: Provides the toolkit with shared helpers used anywhere else: logging, output
         directories, reproducible random substreams, worker-pool sizing and CSV/JSON writers.
'''

#Imports path for filesystem paths, logging for Python's logging system, csv/json for outputs
#numpy for the random generators
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
import csv
import json
import logging
import os
import zlib

import numpy as np

#Environment variable that caps the worker pool (0 = auto)
THREADS_ENV = "AUTOLYAP_THREADS"

def getLogger (name):
    '''
    Function: getLogger
    Purpose: Gives every module a consistent logging style, and makes them go to the same place
    - Prints labeled messages to the console, and avoids double-adding handlers if called multiple times.
    Inputs: name (str)
    Outputs: logging.Logger object
    '''

    #Creates a logger with a given name
    logger = logging.getLogger(name)

    #Prevents adding duplicate handlers if it gets called multiple times
    if not logger.hasHandlers():
        handler = logging.StreamHandler()
        formatter = logging.Formatter('[%(levelname)s] %(name)s: %(message)s')
        handler.setFormatter(formatter)
        logger.addHandler(handler)
        logger.setLevel(logging.INFO)
    return logger

def setVerbosity (verbose):
    '''
    Switch every toolkit logger between INFO and DEBUG.
    Inputs: verbose (bool)
    Outputs: None
    '''
    level = logging.DEBUG if verbose else logging.INFO
    for name in list(logging.root.manager.loggerDict):
        if name.startswith("stochstab"):
            logging.getLogger(name).setLevel(level)


#Helper that creates directories and checks for parent directories as well
#If they already exist then it does not do anything
def ensureDir (path):
    '''
    Create directory if it does not exist.
    Inputs: path (Path)
    Outputs: None
    '''
    Path(path).mkdir(parents=True, exist_ok=True)


def substream (masterSeed, index, label):
    '''
    Function: substream
    Purpose: Build the random generator of one trajectory/stream
    - Counter construction: the Philox key comes from (master seed, trajectory index, label),
      so adding trajectories never changes the numbers an existing trajectory draws.
    Inputs: masterSeed (int), index (int), label (str)
    Outputs: numpy.random.Generator
    '''
    labelKey = zlib.crc32(label.encode("utf-8"))
    seq = np.random.SeedSequence(int(masterSeed), spawn_key=(int(index), labelKey))
    return np.random.Generator(np.random.Philox(seq))

def workerCount ():
    '''
    Number of worker threads for trajectory batches, capped by AUTOLYAP_THREADS (0 or unset = auto).
    Outputs: int >= 1
    '''
    raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
    try:
        cap = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got '{raw}'")
    if cap < 0:
        raise ValueError(f"{THREADS_ENV} must be >= 0, got {cap}")
    auto = os.cpu_count() or 1
    return auto if cap == 0 else cap

def mapOrdered (func, items):
    '''
    Function: mapOrdered
    Purpose: Run func over items on the worker pool and return the results in input order
    - Reductions downstream iterate this list, so the result never depends on scheduling.
    Inputs: func (callable), items (iterable)
    Outputs: list
    '''
    items = list(items)
    workers = min(workerCount(), max(len(items), 1))
    if workers == 1:
        return [func(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))

def trajectoryBatches (nTraj, batchSize=8):
    '''
    Split trajectory indices 0..nTraj-1 into contiguous batches.
    Inputs: nTraj (int), batchSize (int)
    Outputs: list of index lists
    '''
    return [list(range(s, min(s + batchSize, nTraj))) for s in range(0, nTraj, batchSize)]


def formatFloat (x):
    '''Serialize a number with 17 significant digits.'''
    return format(float(x), ".17g")

def writeCsv (path, header, rows):
    '''
    Function: writeCsv
    Purpose: Writes a header row followed by numeric rows, every number with 17 significant digits
    Inputs: path (Path), header (list of str), rows (iterable of sequences)
    Outputs: Path
    '''
    path = Path(path)
    ensureDir(path.parent)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([formatFloat(v) if _isNumber(v) else v for v in row])
    return path

def writeJson (path, payload):
    '''
    Write a JSON report with sorted keys (byte-identical across reruns).
    Inputs: path (Path), payload (dict)
    Outputs: Path
    '''
    path = Path(path)
    ensureDir(path.parent)
    with path.open("w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path

def _isNumber (v):
    return isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool)
