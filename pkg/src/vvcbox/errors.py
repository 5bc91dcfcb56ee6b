"""Exception types raised across the toolbox."""


class VvcBoxError(Exception):
    """Base class for all toolbox errors."""


# --- elementary stream parsing ---

class NoStartCodeFound(VvcBoxError):
    pass


class TruncatedNal(VvcBoxError):
    pass


class MalformedEbsp(VvcBoxError):
    pass


class BitstreamUnderflow(VvcBoxError):
    pass


class UnsupportedSyntax(VvcBoxError):
    pass


class OrphanSuffix(VvcBoxError):
    pass


# --- MP4 packaging ---

class NoIrapStart(VvcBoxError):
    pass


class MissingParameterSets(VvcBoxError):
    pass


class OversizedNal(VvcBoxError):
    pass


class NoVvcTrack(VvcBoxError):
    pass


class CorruptSampleTable(VvcBoxError):
    pass


class TruncatedBox(VvcBoxError):
    pass


class SizeOverflow(VvcBoxError):
    pass


class BoundaryNotIrap(VvcBoxError):
    pass


# --- MPEG2-TS ---

class RateExceeded(VvcBoxError):
    pass


class BadSync(VvcBoxError):
    pass


class CrcMismatch(VvcBoxError):
    pass


class ContinuityError(VvcBoxError):
    pass


class TooManyStreams(VvcBoxError):
    pass


# --- segment planning / manifests ---

class NoIrap(VvcBoxError):
    pass


class FirstAuNotIrap(VvcBoxError):
    pass


class InconsistentPlan(VvcBoxError):
    pass
