"""nodal-lab: nodal length of flat toral eigenfunctions at and above Planck scale."""

__version__ = "0.1.0"
