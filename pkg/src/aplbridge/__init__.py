"""aplbridge: APL-to-C# translation toolkit.

Header-derived C# signatures, an APL-subset oracle interpreter,
guided LLM translation strategies, and a compile-and-execute
verification harness with failure classification.
"""

__version__ = "0.1.0"
