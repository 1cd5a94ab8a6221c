"""RIS-aided THz multiuser MIMO downlink: channel simulation and joint beamforming."""

__version__ = "0.1.0"
