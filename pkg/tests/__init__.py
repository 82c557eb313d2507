"""
Test package for the tensor-train density estimation toolkit
"""
