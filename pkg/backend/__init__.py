# Backend package for the SOOT deconvolution toolkit
