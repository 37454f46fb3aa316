"""Namespace URIs used by the e-document vocabularies."""

DSIG = "http://www.w3.org/2000/09/xmldsig#"
XSD = "http://www.w3.org/2001/XMLSchema"
XSI = "http://www.w3.org/2001/XMLSchema-instance"
XSL = "http://www.w3.org/1999/XSL/Transform"
XML = "http://www.w3.org/XML/1998/namespace"

# Definitions (generic schemas, documentTypeData) use the project namespace,
# envelopes, transforms and MHTML output use the university one. Both are
# taken verbatim from the published listings.
AIDA_DEFINITIONS = "http://aida.infonova.at"
AIDA_ENVELOPE = "http://www.polito.it"
AIDA_ANY = (AIDA_DEFINITIONS, AIDA_ENVELOPE)

C14N = "http://www.w3.org/TR/2001/REC-xml-c14n-20010315"
