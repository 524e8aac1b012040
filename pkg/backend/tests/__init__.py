# Tests package for the SOOT deconvolution backend
